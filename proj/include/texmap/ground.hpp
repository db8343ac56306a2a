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

#include <vector>

namespace texmap
{

/// Default cut for a roof-mounted sensor about 1.73 m above the road.
inline constexpr double kDefaultGroundZThreshold = -1.55;

struct GroundSplit
{
  PointCloud ground;
  PointCloud non_ground;
  double z_threshold;
  std::vector<std::size_t> ground_indices;      // into the input scan
  std::vector<std::size_t> non_ground_indices;  // into the input scan
};

/// Partitions a vehicle-frame scan by height: z < threshold is ground.
/// Both halves keep input order.
inline GroundSplit split_ground(const PointCloud &scan, double z_threshold = kDefaultGroundZThreshold)
{
  GroundSplit out{PointCloud(scan.frame(), scan.has_intensity(), scan.has_color()),
                  PointCloud(scan.frame(), scan.has_intensity(), scan.has_color()), z_threshold, {}, {}};
  for (std::size_t i = 0; i < scan.size(); ++i) {
    if (scan.point(i).z() < z_threshold) {
      out.ground.push_from(scan, i);
      out.ground_indices.push_back(i);
    } else {
      out.non_ground.push_from(scan, i);
      out.non_ground_indices.push_back(i);
    }
  }
  return out;
}

}  // namespace texmap
