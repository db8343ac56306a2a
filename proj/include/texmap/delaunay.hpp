// Copyright 2026 The texmap Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "texmap/predicates.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace texmap
{

/// Incremental 2D Delaunay triangulation.
///
/// Vertices are inserted one at a time: the containing triangle is found by a
/// visibility walk, split 1-to-3 (or 2-to-4 when the point lands on an edge),
/// and the Delaunay property is restored by Lawson edge flips. Three
/// super-vertices far outside the declared domain bound the structure; any
/// triangle touching them is hidden from `triangles()`.
///
/// Every real triangle has an empty circumcircle with respect to all real
/// vertices. Hull triangles whose circumcircle would reach a super-vertex may
/// be missing, so the union of triangles can be slightly smaller than the
/// convex hull.
template <typename Payload>
class DelaunayTriangulation
{
public:
  using Triangle = std::array<std::size_t, 3>;  // real vertex indices, counter-clockwise

  static constexpr double kDuplicateTolerance = 1e-9;

  DelaunayTriangulation(const Eigen::Vector2d &lo, const Eigen::Vector2d &hi)
  {
    if (!(hi.x() >= lo.x() && hi.y() >= lo.y()) || !lo.allFinite() || !hi.allFinite()) {
      throw std::invalid_argument("DelaunayTriangulation: invalid domain bounds");
    }
    const double span = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1.0});
    domain_lo_ = lo.array() - span;
    domain_hi_ = hi.array() + span;
    const Eigen::Vector2d c = 0.5 * (lo + hi);
    const double k = 1e4 * span;
    positions_ = {Eigen::Vector2d(c.x() - 2.0 * k, c.y() - k), Eigen::Vector2d(c.x() + 2.0 * k, c.y() - k),
                  Eigen::Vector2d(c.x(), c.y() + 2.0 * k)};
    tris_.push_back(Tri{{0, 1, 2}, {-1, -1, -1}});
  }

  std::size_t vertex_count() const { return payloads_.size(); }
  const Eigen::Vector2d &position(std::size_t i) const { return positions_[i + kSuper]; }
  const Payload &payload(std::size_t i) const { return payloads_[i]; }

  /// Inserts a vertex and restores the Delaunay property. Returns its index,
  /// or nullopt when a vertex already sits within kDuplicateTolerance (no-op).
  /// Throws std::out_of_range for points outside the declared domain.
  std::optional<std::size_t> insert(const Eigen::Vector2d &p, Payload payload)
  {
    if (!p.allFinite() || p.x() < domain_lo_.x() || p.y() < domain_lo_.y() || p.x() > domain_hi_.x() ||
        p.y() > domain_hi_.y()) {
      throw std::out_of_range("DelaunayTriangulation: vertex outside the triangulation domain");
    }
    const std::int32_t t = locate(p);
    if (is_duplicate(t, p)) return std::nullopt;

    const Tri &tri = tris_[t];
    int on_edge = -1;
    for (int i = 0; i < 3; ++i) {
      if (predicates::orient2d(pos(tri.v[(i + 1) % 3]), pos(tri.v[(i + 2) % 3]), p) == 0) on_edge = i;
    }

    const auto vid = std::uint32_t(positions_.size());
    positions_.push_back(p);
    payloads_.push_back(std::move(payload));

    if (on_edge >= 0 && tri.n[on_edge] >= 0) {
      split_edge(t, on_edge, vid);
    } else {
      split_triangle(t, vid);
    }
    legalize();
    return std::size_t(vid - kSuper);
  }

  /// Real triangles (no super-vertex), counter-clockwise, indexed into the real vertices.
  std::vector<Triangle> triangles() const
  {
    std::vector<Triangle> out;
    out.reserve(tris_.size());
    for (const auto &t : tris_) {
      if (t.v[0] < kSuper || t.v[1] < kSuper || t.v[2] < kSuper) continue;
      out.push_back({t.v[0] - kSuper, t.v[1] - kSuper, t.v[2] - kSuper});
    }
    return out;
  }

private:
  static constexpr std::uint32_t kSuper = 3;

  struct Tri
  {
    std::array<std::uint32_t, 3> v;  // counter-clockwise
    std::array<std::int32_t, 3> n;   // n[i] is across the edge opposite v[i]; -1 outside
  };

  const Eigen::Vector2d &pos(std::uint32_t v) const { return positions_[v]; }

  std::int32_t locate(const Eigen::Vector2d &p)
  {
    std::int32_t t = std::min<std::int32_t>(last_, std::int32_t(tris_.size()) - 1);
    const std::size_t max_steps = 4 * tris_.size() + 16;
    for (std::size_t step = 0; step < max_steps; ++step) {
      const Tri &tri = tris_[t];
      // Rotating the first edge tested keeps the walk from cycling.
      walk_state_ = walk_state_ * 1103515245u + 12345u;
      const int start = int((walk_state_ >> 16) % 3);
      bool moved = false;
      for (int k = 0; k < 3; ++k) {
        const int i = (start + k) % 3;
        if (predicates::orient2d(pos(tri.v[(i + 1) % 3]), pos(tri.v[(i + 2) % 3]), p) < 0) {
          if (tri.n[i] < 0) throw std::out_of_range("DelaunayTriangulation: point outside the super-triangle");
          t = tri.n[i];
          moved = true;
          break;
        }
      }
      if (!moved) return t;
    }
    // Unreachable with exact predicates; fall back to a scan.
    for (std::size_t i = 0; i < tris_.size(); ++i) {
      const Tri &tri = tris_[i];
      if (predicates::orient2d(pos(tri.v[0]), pos(tri.v[1]), p) >= 0 &&
          predicates::orient2d(pos(tri.v[1]), pos(tri.v[2]), p) >= 0 &&
          predicates::orient2d(pos(tri.v[2]), pos(tri.v[0]), p) >= 0) {
        return std::int32_t(i);
      }
    }
    throw std::logic_error("DelaunayTriangulation: point location failed");
  }

  bool is_duplicate(std::int32_t t, const Eigen::Vector2d &p) const
  {
    const double tol2 = kDuplicateTolerance * kDuplicateTolerance;
    auto near = [&](const Tri &tri) {
      for (auto v : tri.v) {
        if (v >= kSuper && (pos(v) - p).squaredNorm() <= tol2) return true;
      }
      return false;
    };
    const Tri &tri = tris_[t];
    if (near(tri)) return true;
    for (auto n : tri.n) {
      if (n >= 0 && near(tris_[n])) return true;
    }
    return false;
  }

  void replace_neighbor(std::int32_t t, std::int32_t from, std::int32_t to)
  {
    if (t < 0) return;
    for (auto &n : tris_[t].n) {
      if (n == from) {
        n = to;
        return;
      }
    }
  }

  void split_triangle(std::int32_t t, std::uint32_t p)
  {
    const Tri old = tris_[t];
    const std::uint32_t a = old.v[0], b = old.v[1], c = old.v[2];
    const std::int32_t na = old.n[0], nb = old.n[1], nc = old.n[2];
    const auto t0 = t;
    const auto t1 = std::int32_t(tris_.size());
    const auto t2 = t1 + 1;
    tris_[t0] = Tri{{a, b, p}, {t1, t2, nc}};
    tris_.push_back(Tri{{b, c, p}, {t2, t0, na}});
    tris_.push_back(Tri{{c, a, p}, {t0, t1, nb}});
    replace_neighbor(na, t, t1);
    replace_neighbor(nb, t, t2);
    pending_ = {{t0, 2}, {t1, 2}, {t2, 2}};
    last_ = t0;
  }

  // p lies on the edge of t opposite vertex index i.
  void split_edge(std::int32_t t, int i, std::uint32_t p)
  {
    const Tri tt = tris_[t];
    const std::int32_t u = tt.n[i];
    const Tri tu = tris_[u];
    int j = 0;
    while (tu.n[j] != t) ++j;

    const std::uint32_t a = tt.v[i], b = tt.v[(i + 1) % 3], c = tt.v[(i + 2) % 3];
    const std::uint32_t d = tu.v[j];
    const std::int32_t nb_t = tt.n[(i + 1) % 3];  // across (c, a)
    const std::int32_t nc_t = tt.n[(i + 2) % 3];  // across (a, b)
    const std::int32_t nc_u = tu.n[(j + 1) % 3];  // across (b, d)
    const std::int32_t nb_u = tu.n[(j + 2) % 3];  // across (d, c)

    const auto t0 = t;
    const auto t2 = u;
    const auto t1 = std::int32_t(tris_.size());
    const auto t3 = t1 + 1;
    tris_[t0] = Tri{{a, b, p}, {t3, t1, nc_t}};
    tris_[t2] = Tri{{d, c, p}, {t1, t3, nb_u}};
    tris_.push_back(Tri{{a, p, c}, {t2, nb_t, t0}});
    tris_.push_back(Tri{{d, p, b}, {t0, nc_u, t2}});
    replace_neighbor(nb_t, t, t1);
    replace_neighbor(nc_u, u, t3);
    pending_ = {{t0, 2}, {t1, 1}, {t2, 2}, {t3, 1}};
    last_ = t0;
  }

  // Lawson flips around the freshly inserted vertex until every edge is locally Delaunay.
  void legalize()
  {
    while (!pending_.empty()) {
      const auto [t, k] = pending_.back();
      pending_.pop_back();
      const Tri tt = tris_[t];
      const std::int32_t u = tt.n[k];
      if (u < 0) continue;
      const Tri tu = tris_[u];
      int j = 0;
      while (tu.n[j] != t) ++j;
      const std::uint32_t d = tu.v[j];
      if (predicates::incircle(pos(tt.v[0]), pos(tt.v[1]), pos(tt.v[2]), pos(d)) <= 0) continue;

      const std::uint32_t p = tt.v[k], x = tt.v[(k + 1) % 3], y = tt.v[(k + 2) % 3];
      const std::int32_t na = tt.n[(k + 1) % 3];  // across (y, p)
      const std::int32_t nb = tt.n[(k + 2) % 3];  // across (p, x)
      const std::int32_t nc = tu.n[(j + 1) % 3];  // across (x, d)
      const std::int32_t nd = tu.n[(j + 2) % 3];  // across (d, y)

      tris_[t] = Tri{{p, x, d}, {nc, u, nb}};
      tris_[u] = Tri{{p, d, y}, {nd, na, t}};
      replace_neighbor(nc, u, t);
      replace_neighbor(na, t, u);
      pending_.push_back({t, 0});
      pending_.push_back({u, 0});
    }
  }

  struct PendingEdge
  {
    std::int32_t tri;
    int opposite;
  };

  std::vector<Eigen::Vector2d> positions_;  // super-vertices first
  std::vector<Payload> payloads_;           // real vertices only
  std::vector<Tri> tris_;
  std::vector<PendingEdge> pending_;
  Eigen::Vector2d domain_lo_;
  Eigen::Vector2d domain_hi_;
  std::int32_t last_{0};
  std::uint32_t walk_state_{0x9e3779b9u};
};

/// Index permutation sorting 2D points along a Hilbert curve over [lo, hi].
/// Inserting in this order keeps point-location walks short.
inline std::vector<std::size_t> hilbert_order(std::span<const Eigen::Vector2d> points, const Eigen::Vector2d &lo,
                                              const Eigen::Vector2d &hi)
{
  constexpr std::uint32_t kSide = 1u << 16;
  const Eigen::Vector2d extent = (hi - lo).cwiseMax(Eigen::Vector2d::Constant(1e-12));
  std::vector<std::uint64_t> keys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Eigen::Vector2d r = ((points[i] - lo).array() / extent.array()).cwiseMax(0.0).cwiseMin(1.0);
    std::uint32_t x = std::min<std::uint32_t>(std::uint32_t(r.x() * (kSide - 1)), kSide - 1);
    std::uint32_t y = std::min<std::uint32_t>(std::uint32_t(r.y() * (kSide - 1)), kSide - 1);
    std::uint64_t d = 0;
    for (std::uint32_t s = kSide / 2; s > 0; s /= 2) {
      const std::uint32_t rx = (x & s) ? 1u : 0u;
      const std::uint32_t ry = (y & s) ? 1u : 0u;
      d += std::uint64_t(s) * s * ((3u * rx) ^ ry);
      if (ry == 0) {
        if (rx == 1) {
          x = kSide - 1 - x;
          y = kSide - 1 - y;
        }
        std::swap(x, y);
      }
    }
    keys[i] = d;
  }
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  return order;
}

}  // namespace texmap
