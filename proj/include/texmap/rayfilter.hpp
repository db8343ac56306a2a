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
#include "texmap/image.hpp"
#include "texmap/texture_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace texmap
{

struct RayFilterConfig
{
  int window_size_M{5};
  double outlier_rate_c{1.0};

  void validate() const
  {
    if (window_size_M < 1 || window_size_M % 2 == 0) {
      throw std::invalid_argument("RayFilterConfig: window size must be odd and >= 1");
    }
    if (!(outlier_rate_c > 0.0)) throw std::invalid_argument("RayFilterConfig: outlier rate must be > 0");
  }
};

enum class RayOrigin : std::uint8_t
{
  ScanPoint,
  MapPoint
};

struct RayEntry
{
  double d{std::numeric_limits<double>::infinity()};
  RayOrigin origin{RayOrigin::ScanPoint};
  std::uint32_t index{0};

  bool occupied() const { return std::isfinite(d); }
};

/// Ray lengths equal within this tolerance are ties.
inline constexpr double kRayTieTolerance = 1e-9;

/// Strict winner order: shorter ray, then MapPoint before ScanPoint, then lower index.
inline bool ray_beats(const RayEntry &a, const RayEntry &b)
{
  if (!b.occupied()) return a.occupied();
  if (!a.occupied()) return false;
  if (a.d < b.d - kRayTieTolerance) return true;
  if (b.d < a.d - kRayTieTolerance) return false;
  if (a.origin != b.origin) return a.origin == RayOrigin::MapPoint;
  return a.index < b.index;
}

/// Per-pixel shortest ray over scan and map points, plus per-pixel map-ray counts.
class RayBuffer
{
public:
  RayBuffer(const PointCloud &scan_pts, const PointCloud &map_foveal_pts, const CameraModel &cam)
  : width_(cam.width()), height_(cam.height()), winners_(std::size_t(width_) * height_),
    map_rays_(std::size_t(width_) * height_, 0), scan_proj_(scan_pts.size())
  {
    for (std::size_t i = 0; i < map_foveal_pts.size(); ++i) {
      if (auto p = project_point(map_foveal_pts.point(i), cam)) {
        const std::size_t k = cell(p->pixel);
        ++map_rays_[k];
        offer(k, {p->ray_length, RayOrigin::MapPoint, std::uint32_t(i)});
      }
    }
    for (std::size_t i = 0; i < scan_pts.size(); ++i) {
      if (auto p = project_point(scan_pts.point(i), cam)) {
        scan_proj_[i] = *p;
        offer(cell(p->pixel), {p->ray_length, RayOrigin::ScanPoint, std::uint32_t(i)});
      }
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  const RayEntry &winner(const Pixel &px) const { return winners_[cell(px)]; }
  std::uint32_t map_rays(const Pixel &px) const { return map_rays_[cell(px)]; }
  const std::optional<Projection> &scan_projection(std::size_t i) const { return scan_proj_.at(i); }
  std::size_t scan_size() const { return scan_proj_.size(); }

  std::size_t occupied_pixels() const
  {
    return std::size_t(std::count_if(winners_.begin(), winners_.end(), [](const RayEntry &e) { return e.occupied(); }));
  }

private:
  std::size_t cell(const Pixel &px) const { return std::size_t(px.v) * std::size_t(width_) + std::size_t(px.u); }

  void offer(std::size_t k, const RayEntry &e)
  {
    if (ray_beats(e, winners_[k])) winners_[k] = e;
  }

  int width_;
  int height_;
  std::vector<RayEntry> winners_;
  std::vector<std::uint32_t> map_rays_;
  std::vector<std::optional<Projection>> scan_proj_;
};

inline RayBuffer build_ray_buffer(const PointCloud &scan_pts, const PointCloud &map_foveal_pts,
                                  const CameraModel &cam)
{
  return {scan_pts, map_foveal_pts, cam};
}

enum class VisibilityVerdict : std::uint8_t
{
  Visible,
  Occluding,
  Occluded,
  OutOfView  // does not project into the image; never textured
};

inline std::string_view to_string(VisibilityVerdict v)
{
  switch (v) {
    case VisibilityVerdict::Visible: return "visible";
    case VisibilityVerdict::Occluding: return "occluding";
    case VisibilityVerdict::Occluded: return "occluded";
    case VisibilityVerdict::OutOfView: return "out_of_view";
  }
  return "?";
}

/// True when scan point `i` wins its pixel while at least one map ray lands there.
inline bool occluding_test(const RayBuffer &buffer, std::size_t i)
{
  const auto &proj = buffer.scan_projection(i);
  if (!proj) return false;
  const RayEntry &w = buffer.winner(proj->pixel);
  return w.origin == RayOrigin::ScanPoint && w.index == i && buffer.map_rays(proj->pixel) > 0;
}

/// Window statistics test. The population is every winning ray in the M x M
/// window (clipped at the borders) other than the candidate's own entry, plus
/// the candidate's ray length; the candidate is an outlier when it sits more
/// than c standard deviations from the population mean.
inline bool occluded_test(const RayBuffer &buffer, std::size_t i, const RayFilterConfig &cfg)
{
  const auto &proj = buffer.scan_projection(i);
  if (!proj) return false;
  const int r = cfg.window_size_M / 2;
  const double dt = proj->ray_length;
  double sum = dt, sum2 = 0.0;
  std::size_t n = 1;
  std::vector<double> values{dt};
  for (int v = std::max(0, proj->pixel.v - r); v <= std::min(buffer.height() - 1, proj->pixel.v + r); ++v) {
    for (int u = std::max(0, proj->pixel.u - r); u <= std::min(buffer.width() - 1, proj->pixel.u + r); ++u) {
      const RayEntry &e = buffer.winner({u, v});
      if (!e.occupied()) continue;
      if (e.origin == RayOrigin::ScanPoint && e.index == i) continue;
      values.push_back(e.d);
      sum += e.d;
      ++n;
    }
  }
  if (n < 2) return false;
  const double mu = sum / double(n);
  for (double d : values) sum2 += (d - mu) * (d - mu);
  const double sigma = std::sqrt(sum2 / double(n));
  if (sigma < 1e-9) return false;
  return std::abs(dt - mu) / sigma > cfg.outlier_rate_c;
}

/// Verdict for scan point `i`. A point that loses its pixel to a map ray is
/// hidden behind existing map content and is reported Occluded without
/// consulting the window statistics.
inline VisibilityVerdict classify(const RayBuffer &buffer, std::size_t i, const RayFilterConfig &cfg)
{
  const auto &proj = buffer.scan_projection(i);
  if (!proj) return VisibilityVerdict::OutOfView;
  const RayEntry &w = buffer.winner(proj->pixel);
  if (w.origin == RayOrigin::MapPoint) return VisibilityVerdict::Occluded;
  if (occluding_test(buffer, i)) return VisibilityVerdict::Occluding;
  return occluded_test(buffer, i, cfg) ? VisibilityVerdict::Occluded : VisibilityVerdict::Visible;
}

inline std::vector<VisibilityVerdict> classify_all(const RayBuffer &buffer, const RayFilterConfig &cfg)
{
  cfg.validate();
  std::vector<VisibilityVerdict> out(buffer.scan_size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = classify(buffer, i, cfg);
  return out;
}

struct AccumulateStats
{
  std::size_t candidates{0};
  std::size_t visible{0};
  std::size_t occluding{0};
  std::size_t occluded{0};
  std::size_t out_of_view{0};
  std::size_t appended{0};
};

/// Ray buffer plus one verdict per scan point. With `filter` false the map is
/// ignored and every in-image point is Visible (no occlusion handling).
struct FilterResult
{
  RayBuffer buffer;
  std::vector<VisibilityVerdict> verdicts;
};

/// `scan` and `map_foveal` are expressed in the camera's source frame.
inline FilterResult ray_filter(const PointCloud &scan, const PointCloud &map_foveal, const CameraModel &cam,
                               const RayFilterConfig &cfg, bool filter = true)
{
  cfg.validate();
  FilterResult out{RayBuffer(scan, filter ? map_foveal : PointCloud(scan.frame()), cam), {}};
  out.verdicts = classify_all(out.buffer, cfg);
  if (!filter) {
    for (auto &v : out.verdicts) {
      if (v != VisibilityVerdict::OutOfView) v = VisibilityVerdict::Visible;
    }
  }
  return out;
}

/// Colors the Visible points of `scan` from `image` and appends them to `map`
/// through `source_to_local`. Existing map points are never touched.
inline AccumulateStats texture_accumulate(const PointCloud &scan, const FilterResult &filtered, TexturedMap &map,
                                          const RgbImage &image, const RigidTransform &source_to_local, long frame_id)
{
  if (image.width() != filtered.buffer.width() || image.height() != filtered.buffer.height()) {
    throw std::invalid_argument("texture_accumulate: image size does not match the camera model");
  }
  if (filtered.verdicts.size() != scan.size()) {
    throw std::invalid_argument("texture_accumulate: verdicts do not match the scan");
  }
  AccumulateStats stats;
  stats.candidates = scan.size();
  for (std::size_t i = 0; i < scan.size(); ++i) {
    switch (filtered.verdicts[i]) {
      case VisibilityVerdict::Visible: ++stats.visible; break;
      case VisibilityVerdict::Occluding: ++stats.occluding; continue;
      case VisibilityVerdict::Occluded: ++stats.occluded; continue;
      case VisibilityVerdict::OutOfView: ++stats.out_of_view; continue;
    }
    map.append(source_to_local * scan.point(i), image.at(filtered.buffer.scan_projection(i)->pixel), frame_id);
    ++stats.appended;
  }
  return stats;
}

/// ray_filter followed by texture_accumulate.
inline AccumulateStats filter_texture_accumulate(const PointCloud &scan, const PointCloud &map_foveal,
                                                 TexturedMap &map, const RgbImage &image, const CameraModel &cam,
                                                 const RigidTransform &source_to_local, long frame_id,
                                                 const RayFilterConfig &cfg, bool filter = true)
{
  if (image.width() != cam.width() || image.height() != cam.height()) {
    throw std::invalid_argument("filter_texture_accumulate: image size does not match the camera model");
  }
  return texture_accumulate(scan, ray_filter(scan, map_foveal, cam, cfg, filter), map, image, source_to_local,
                            frame_id);
}

}  // namespace texmap
