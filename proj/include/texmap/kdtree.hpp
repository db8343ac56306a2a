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

#include "texmap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

namespace texmap
{

/// Exact 3D k-d tree. Build once, query many; concurrent const queries are safe.
///
/// Results are ordered by (distance, insertion index), so among equidistant
/// points the one inserted first always wins.
class KdTree
{
public:
  struct Neighbor
  {
    std::size_t index;  // insertion index of the point
    double distance;    // Euclidean, meters
  };

  KdTree() = default;

  explicit KdTree(std::span<const Point3> points, std::size_t leaf_size = 12)
  : leaf_size_(std::max<std::size_t>(leaf_size, 1))
  {
    build(points);
  }

  explicit KdTree(const std::vector<Point3> &points, std::size_t leaf_size = 12)
  : KdTree(std::span<const Point3>(points), leaf_size)
  {
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  /// Point by insertion index.
  const Point3 &point(std::size_t index) const { return points_[position_[index]]; }

  Neighbor nearest(const Point3 &query) const
  {
    require_non_empty();
    Best best{std::numeric_limits<double>::infinity(), std::numeric_limits<std::uint32_t>::max()};
    search_nearest(0, query, best);
    return {best.index, std::sqrt(best.dist2)};
  }

  /// The k nearest points sorted by (distance, index); fewer if the tree is smaller.
  std::vector<Neighbor> knn(const Point3 &query, std::size_t k) const
  {
    require_non_empty();
    std::vector<Candidate> heap;
    heap.reserve(k + 1);
    if (k > 0) search_knn(0, query, k, heap);
    std::sort_heap(heap.begin(), heap.end());
    std::vector<Neighbor> out;
    out.reserve(heap.size());
    for (const auto &c : heap) out.push_back({c.index, std::sqrt(c.dist2)});
    return out;
  }

  /// All points within `radius` (inclusive), sorted by (distance, index).
  std::vector<Neighbor> radius(const Point3 &query, double radius) const
  {
    require_non_empty();
    std::vector<Candidate> found;
    search_radius(0, query, radius * radius, found);
    std::sort(found.begin(), found.end());
    std::vector<Neighbor> out;
    out.reserve(found.size());
    for (const auto &c : found) out.push_back({c.index, std::sqrt(c.dist2)});
    return out;
  }

private:
  struct Node
  {
    std::uint32_t begin;
    std::uint32_t end;
    std::int32_t left{-1};
    std::int32_t right{-1};
    int dim{0};
    double split{0.0};
    bool leaf() const { return left < 0; }
  };

  struct Best
  {
    double dist2;
    std::uint32_t index;
  };

  struct Candidate
  {
    double dist2;
    std::uint32_t index;
    friend bool operator<(const Candidate &a, const Candidate &b)
    {
      return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
    }
  };

  void require_non_empty() const
  {
    if (points_.empty()) throw std::logic_error("KdTree: query on an empty index");
  }

  void build(std::span<const Point3> input)
  {
    if (input.size() >= std::numeric_limits<std::uint32_t>::max()) {
      throw std::length_error("KdTree: too many points");
    }
    std::vector<std::uint32_t> order(input.size());
    std::iota(order.begin(), order.end(), 0u);
    nodes_.clear();
    if (!input.empty()) {
      nodes_.reserve(2 * input.size() / leaf_size_ + 2);
      build_node(input, order, 0, std::uint32_t(order.size()));
    }
    // Store points in tree order so leaves scan contiguous memory.
    points_.resize(input.size());
    indices_ = order;
    position_.resize(input.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      points_[i] = input[order[i]];
      position_[order[i]] = std::uint32_t(i);
    }
  }

  std::int32_t build_node(std::span<const Point3> pts, std::vector<std::uint32_t> &order, std::uint32_t begin,
                          std::uint32_t end)
  {
    const auto id = std::int32_t(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= leaf_size_) return id;

    Eigen::Vector3d lo = pts[order[begin]];
    Eigen::Vector3d hi = lo;
    for (std::uint32_t i = begin + 1; i < end; ++i) {
      lo = lo.cwiseMin(pts[order[i]]);
      hi = hi.cwiseMax(pts[order[i]]);
    }
    int dim = 0;
    (hi - lo).maxCoeff(&dim);
    if (hi[dim] - lo[dim] <= 0.0) return id;  // all coincident: keep as a leaf

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) { return pts[a][dim] < pts[b][dim]; });
    const double split = pts[order[mid]][dim];

    nodes_[id].dim = dim;
    nodes_[id].split = split;
    const auto left = build_node(pts, order, begin, mid);
    const auto right = build_node(pts, order, mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  // Invariant: left subtree coordinates <= split <= right subtree coordinates.
  void search_nearest(std::int32_t id, const Point3 &q, Best &best) const
  {
    const Node &n = nodes_[id];
    if (n.leaf()) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const double d2 = (points_[i] - q).squaredNorm();
        const std::uint32_t idx = indices_[i];
        if (d2 < best.dist2 || (d2 == best.dist2 && idx < best.index)) best = {d2, idx};
      }
      return;
    }
    const double diff = q[n.dim] - n.split;
    const std::int32_t near = diff < 0.0 ? n.left : n.right;
    const std::int32_t far = diff < 0.0 ? n.right : n.left;
    search_nearest(near, q, best);
    if (diff * diff <= best.dist2) search_nearest(far, q, best);
  }

  void search_knn(std::int32_t id, const Point3 &q, std::size_t k, std::vector<Candidate> &heap) const
  {
    const Node &n = nodes_[id];
    if (n.leaf()) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const Candidate c{(points_[i] - q).squaredNorm(), indices_[i]};
        if (heap.size() < k) {
          heap.push_back(c);
          std::push_heap(heap.begin(), heap.end());
        } else if (c < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = c;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      return;
    }
    const double diff = q[n.dim] - n.split;
    const std::int32_t near = diff < 0.0 ? n.left : n.right;
    const std::int32_t far = diff < 0.0 ? n.right : n.left;
    search_knn(near, q, k, heap);
    if (heap.size() < k || diff * diff <= heap.front().dist2) search_knn(far, q, k, heap);
  }

  void search_radius(std::int32_t id, const Point3 &q, double r2, std::vector<Candidate> &out) const
  {
    const Node &n = nodes_[id];
    if (n.leaf()) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const double d2 = (points_[i] - q).squaredNorm();
        if (d2 <= r2) out.push_back({d2, indices_[i]});
      }
      return;
    }
    const double diff = q[n.dim] - n.split;
    const std::int32_t near = diff < 0.0 ? n.left : n.right;
    const std::int32_t far = diff < 0.0 ? n.right : n.left;
    search_radius(near, q, r2, out);
    if (diff * diff <= r2) search_radius(far, q, r2, out);
  }

  std::size_t leaf_size_{12};
  std::vector<Node> nodes_;
  std::vector<Point3> points_;           // tree order
  std::vector<std::uint32_t> indices_;   // tree order -> insertion index
  std::vector<std::uint32_t> position_;  // insertion index -> tree order
};

/// Nearest indexed point and its distance; throws std::logic_error on an empty index.
inline std::pair<Point3, double> nearest_neighbor(const KdTree &index, const Point3 &query)
{
  const auto n = index.nearest(query);
  return {index.point(n.index), n.distance};
}

}  // namespace texmap
