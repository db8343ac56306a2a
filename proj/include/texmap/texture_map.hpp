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
#include "texmap/kdtree.hpp"

#include <memory>
#include <stdexcept>
#include <vector>

namespace texmap
{

/// Accumulated colored cloud in the local frame. Points are write-once: the
/// map only grows. The spatial index is rebuilt on first use after appends,
/// so index() is not safe to call concurrently with append().
class TexturedMap
{
public:
  TexturedMap() : cloud_(Frame::Local, false, true) {}

  /// Adopts an existing local-frame colored cloud, tagging every point with `frame_id`.
  explicit TexturedMap(const PointCloud &cloud, long frame_id = 0) : TexturedMap()
  {
    if (cloud.frame() != Frame::Local) throw std::invalid_argument("TexturedMap: cloud must be in the local frame");
    if (!cloud.has_color()) throw std::invalid_argument("TexturedMap: cloud must carry colors");
    for (std::size_t i = 0; i < cloud.size(); ++i) append(cloud.point(i), cloud.color(i), frame_id);
  }

  std::size_t size() const { return cloud_.size(); }
  bool empty() const { return cloud_.empty(); }
  const PointCloud &cloud() const { return cloud_; }
  const std::vector<long> &frame_ids() const { return frame_ids_; }

  void append(const Point3 &p, ColorRGB color, long frame_id)
  {
    cloud_.push_back(p, 0.0f, color);
    frame_ids_.push_back(frame_id);
    index_.reset();
  }

  const KdTree &index() const
  {
    if (cloud_.empty()) throw std::logic_error("TexturedMap: index of an empty map");
    if (!index_) index_ = std::make_shared<const KdTree>(cloud_.points());
    return *index_;
  }

  bool index_valid() const { return index_ != nullptr; }

private:
  PointCloud cloud_;
  std::vector<long> frame_ids_;
  mutable std::shared_ptr<const KdTree> index_;
};

}  // namespace texmap
