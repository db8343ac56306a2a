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

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace texmap
{

inline constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

struct FovealConfig
{
  double near_blind_radius{3.0};         // meters, inclusive lower bound of the white zone
  double white_zone_outer_radius{15.0};  // meters, exclusive upper bound
  double horizontal_slice_half_angle{deg2rad(5.0)};  // vertical half-extent of the horizontal band
  double vertical_slice_half_angle{deg2rad(5.0)};    // horizontal half-extent of the vertical band

  void validate() const
  {
    if (!(near_blind_radius >= 0.0) || !(near_blind_radius < white_zone_outer_radius)) {
      throw std::invalid_argument("FovealConfig: need 0 <= near radius < far radius");
    }
    if (!(horizontal_slice_half_angle > 0.0) || !(vertical_slice_half_angle > 0.0) ||
        !(horizontal_slice_half_angle < std::numbers::pi / 2) || !(vertical_slice_half_angle < std::numbers::pi / 2)) {
      throw std::invalid_argument("FovealConfig: slice half-angles must be in (0, pi/2)");
    }
  }

  /// Additionally rejects half-angles wider than the camera's own half-FOV.
  void validate(const CameraModel &cam) const
  {
    validate();
    const double half_v = std::atan(std::max(cam.cy(), cam.height() - cam.cy()) / cam.fy());
    const double half_h = std::atan(std::max(cam.cx(), cam.width() - cam.cx()) / cam.fx());
    if (horizontal_slice_half_angle > half_v + 1e-12 || vertical_slice_half_angle > half_h + 1e-12) {
      throw std::invalid_argument("FovealConfig: slice half-angle exceeds the camera half-FOV");
    }
  }
};

/// White-zone membership plus the "+"-shaped image mask formed by a horizontal
/// band around the principal row and a vertical band around the principal column.
inline bool in_foveal_region(const Point3 &p, const CameraModel &cam, const FovealConfig &cfg)
{
  const auto proj = project_point(p, cam);
  if (!proj) return false;
  const double d = proj->ray_length;
  if (d < cfg.near_blind_radius || d >= cfg.white_zone_outer_radius) return false;
  const auto uv = cam.project_continuous(p);
  if (!uv) return false;
  const bool in_row_band = std::abs(uv->y() - cam.cy()) <= std::tan(cfg.horizontal_slice_half_angle) * cam.fy();
  const bool in_col_band = std::abs(uv->x() - cam.cx()) <= std::tan(cfg.vertical_slice_half_angle) * cam.fx();
  return in_row_band || in_col_band;
}

inline std::vector<std::size_t> foveal_indices(const PointCloud &cloud, const CameraModel &cam,
                                               const FovealConfig &cfg)
{
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (in_foveal_region(cloud.point(i), cam, cfg)) out.push_back(i);
  }
  return out;
}

/// Order-preserving subset of `cloud` inside the foveal region.
inline PointCloud extract_foveal(const PointCloud &cloud, const CameraModel &cam, const FovealConfig &cfg)
{
  return cloud.subset(foveal_indices(cloud, cam, cfg));
}

}  // namespace texmap
