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

#include "texmap/delaunay.hpp"
#include "texmap/geometry.hpp"
#include "texmap/ground.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace texmap
{

struct UpsampleConfig
{
  int rate{1};                       // insertion passes
  double edge_threshold_tau{0.3};    // meters, applied to the 3D triangle edges
  bool constrained{false};           // leave ground points out of the triangulation
  double ground_z_threshold{kDefaultGroundZThreshold};

  void validate() const
  {
    if (rate < 0) throw std::invalid_argument("UpsampleConfig: rate must be >= 0");
    if (!(edge_threshold_tau > 0.0)) throw std::invalid_argument("UpsampleConfig: tau must be > 0");
  }
};

struct UpsampleStats
{
  std::size_t triangulated{0};  // vertices fed to the first triangulation
  std::vector<std::size_t> inserted_per_pass;
};

namespace detail
{
inline bool edges_below(const Point3 &a, const Point3 &b, const Point3 &c, double tau)
{
  const double t2 = tau * tau;
  return (a - b).squaredNorm() < t2 && (b - c).squaredNorm() < t2 && (c - a).squaredNorm() < t2;
}
}  // namespace detail

/// Densifies a cloud through its image projections.
///
/// Projectable points (in front of the camera and inside the image) are
/// Delaunay-triangulated in continuous pixel coordinates. Each pass adds, for
/// every triangle whose three 3D edges are shorter than tau, the 3D centroid of
/// the triangle; the centroid's image projection becomes a new vertex for the
/// next pass. Triangles are frozen at the start of each pass. Points that do
/// not project (and ground points when constrained) pass through untouched.
/// New points average the intensity and color of their triangle.
inline PointCloud upsample(const PointCloud &cloud, const CameraModel &cam, const UpsampleConfig &cfg,
                           UpsampleStats *stats = nullptr)
{
  cfg.validate();
  PointCloud out = cloud;
  if (cfg.rate == 0) return out;

  std::vector<Eigen::Vector2d> uv;
  std::vector<std::size_t> members;
  uv.reserve(cloud.size());
  members.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cfg.constrained && cloud.point(i).z() < cfg.ground_z_threshold) continue;
    if (auto p = cam.project_continuous(cloud.point(i))) {
      uv.push_back(*p);
      members.push_back(i);
    }
  }
  if (stats) stats->triangulated = members.size();
  if (members.size() < 3) return out;

  const Eigen::Vector2d lo(0.0, 0.0);
  const Eigen::Vector2d hi(cam.width(), cam.height());
  DelaunayTriangulation<std::size_t> tri(lo, hi);  // payload: index into `out`
  for (std::size_t k : hilbert_order(uv, lo, hi)) tri.insert(uv[k], members[k]);

  for (int pass = 0; pass < cfg.rate; ++pass) {
    const auto triangles = tri.triangles();
    const bool last_pass = pass + 1 == cfg.rate;
    std::vector<std::pair<Eigen::Vector2d, std::size_t>> fresh;
    std::size_t inserted = 0;
    for (const auto &t : triangles) {
      const std::size_t ia = tri.payload(t[0]), ib = tri.payload(t[1]), ic = tri.payload(t[2]);
      const Point3 &a = out.point(ia);
      const Point3 &b = out.point(ib);
      const Point3 &c = out.point(ic);
      if (!detail::edges_below(a, b, c, cfg.edge_threshold_tau)) continue;

      const Point3 centroid = (a + b + c) / 3.0;
      float intensity = 0.0f;
      if (out.has_intensity()) {
        intensity = (out.intensity(ia) + out.intensity(ib) + out.intensity(ic)) / 3.0f;
      }
      ColorRGB color{};
      if (out.has_color()) {
        const auto avg = [](int x, int y, int z) { return std::uint8_t(std::lround((x + y + z) / 3.0)); };
        color = {avg(out.color(ia).r, out.color(ib).r, out.color(ic).r),
                 avg(out.color(ia).g, out.color(ib).g, out.color(ic).g),
                 avg(out.color(ia).b, out.color(ib).b, out.color(ic).b)};
      }
      out.push_back(centroid, intensity, color);
      ++inserted;
      if (!last_pass) {
        if (auto p = cam.project_continuous(centroid)) fresh.emplace_back(*p, out.size() - 1);
      }
    }
    for (const auto &[p, idx] : fresh) tri.insert(p, idx);
    if (stats) stats->inserted_per_pass.push_back(inserted);
  }
  return out;
}

}  // namespace texmap
