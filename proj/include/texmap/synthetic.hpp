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

// Procedural test scenes made of colored rectangles. Scans and images are
// produced by exact ray casting, so every generated point lies on a known
// surface and carries a known color.

#include "texmap/foveal.hpp"
#include "texmap/frame.hpp"
#include "texmap/geometry.hpp"
#include "texmap/image.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace texmap::synth
{

/// Parallelogram origin + s e1 + w e2, s, w in [0, 1], optionally checkered.
struct Rect
{
  Point3 origin;
  Eigen::Vector3d e1;
  Eigen::Vector3d e2;
  ColorRGB color;
  std::optional<ColorRGB> checker_color;
  double checker_size{1.0};  // meters

  Eigen::Vector3d normal() const { return e1.cross(e2); }

  ColorRGB color_at(double s, double w) const
  {
    if (!checker_color) return color;
    const long a = long(std::floor(s * e1.norm() / checker_size));
    const long b = long(std::floor(w * e2.norm() / checker_size));
    return ((a + b) & 1) ? *checker_color : color;
  }
};

struct Hit
{
  double t{std::numeric_limits<double>::infinity()};
  int surface{-1};
  ColorRGB color{};

  explicit operator bool() const { return surface >= 0; }
};

/// Elevation rings x azimuth steps, sensor at the vehicle origin.
struct BeamModel
{
  int rings{64};
  double min_elevation_deg{-24.8};
  double max_elevation_deg{2.0};
  double azimuth_step_deg{0.2};
  double min_range{0.5};
  double max_range{120.0};
};

struct CameraRig
{
  double fx{500.0}, fy{500.0}, cx{320.0}, cy{120.0};
  int width{640}, height{240};
  Point3 position{0.27, 0.0, -0.08};  // vehicle frame
  ColorRGB background{20, 20, 30};

  /// Forward-looking camera (optical axis along vehicle +x, image rows along -z).
  CameraModel model() const
  {
    Eigen::Matrix3d r;
    r << 0, -1, 0, 0, 0, -1, 1, 0, 0;  // vehicle -> camera axes
    return CameraModel::from_pinhole(fx, fy, cx, cy, width, height, RigidTransform(r, -(r * position)));
  }
};

struct Scene
{
  std::vector<Rect> surfaces;
  std::vector<RigidTransform> trajectory;  // vehicle -> local, one per frame
  BeamModel beams;
  CameraRig camera;
  double pose_noise_translation{0.0};  // meters, per-axis std-dev added to raw poses
  double pose_noise_rotation{0.0};     // radians, per-axis std-dev
  unsigned seed{1};

  int add_rect(const Rect &r)
  {
    surfaces.push_back(r);
    return int(surfaces.size()) - 1;
  }

  /// Axis-aligned box as six rectangles sharing one color (and checker).
  void add_box(const Point3 &lo, const Point3 &hi, ColorRGB color, std::optional<ColorRGB> checker = {},
               double checker_size = 1.0)
  {
    const Eigen::Vector3d d = hi - lo;
    const Eigen::Vector3d ex(d.x(), 0, 0), ey(0, d.y(), 0), ez(0, 0, d.z());
    add_rect({lo, ex, ey, color, checker, checker_size});
    add_rect({lo + ez, ex, ey, color, checker, checker_size});
    add_rect({lo, ex, ez, color, checker, checker_size});
    add_rect({lo + ey, ex, ez, color, checker, checker_size});
    add_rect({lo, ey, ez, color, checker, checker_size});
    add_rect({lo + ex, ey, ez, color, checker, checker_size});
  }
};

/// Nearest intersection with t in [t_min, t_max]; dir need not be normalized.
inline Hit cast_ray(const Scene &scene, const Point3 &origin, const Eigen::Vector3d &dir, double t_min, double t_max)
{
  Hit best;
  best.t = t_max;
  for (std::size_t k = 0; k < scene.surfaces.size(); ++k) {
    const Rect &r = scene.surfaces[k];
    const Eigen::Vector3d n = r.normal();
    const double denom = n.dot(dir);
    if (denom == 0.0) continue;
    const double t = n.dot(r.origin - origin) / denom;
    if (!(t >= t_min && t <= best.t)) continue;
    const Eigen::Vector3d rel = origin + t * dir - r.origin;
    const double s = rel.dot(r.e1) / r.e1.squaredNorm();
    const double w = rel.dot(r.e2) / r.e2.squaredNorm();
    if (s < 0.0 || s > 1.0 || w < 0.0 || w > 1.0) continue;
    if (t == best.t && best.surface >= 0) continue;  // lower surface index wins ties
    best = {t, int(k), r.color_at(s, w)};
  }
  if (best.surface < 0) best.t = std::numeric_limits<double>::infinity();
  return best;
}

struct SurfacePoint
{
  double distance{std::numeric_limits<double>::infinity()};
  int surface{-1};
  ColorRGB color{};
};

/// Closest point over all surfaces (the scene-distance oracle).
inline SurfacePoint nearest_surface(const Scene &scene, const Point3 &p)
{
  SurfacePoint best;
  for (std::size_t k = 0; k < scene.surfaces.size(); ++k) {
    const Rect &r = scene.surfaces[k];
    // Closest point of a parallelogram: minimize over (s, w) in the unit square.
    const Eigen::Vector3d rel = p - r.origin;
    Eigen::Matrix2d g;
    g << r.e1.dot(r.e1), r.e1.dot(r.e2), r.e1.dot(r.e2), r.e2.dot(r.e2);
    const Eigen::Vector2d b(rel.dot(r.e1), rel.dot(r.e2));
    Eigen::Vector2d sw = g.ldlt().solve(b);
    if (sw.x() < 0.0 || sw.x() > 1.0 || sw.y() < 0.0 || sw.y() > 1.0) {
      // Minimum lies on the boundary: check the four edges.
      double best_d2 = std::numeric_limits<double>::infinity();
      Eigen::Vector2d best_sw;
      const auto edge = [&](bool fix_s, double fixed) {
        const Eigen::Vector3d dir = fix_s ? r.e2 : r.e1;
        const Eigen::Vector3d base = r.origin + (fix_s ? fixed * r.e1 : fixed * r.e2);
        const double t = std::clamp((p - base).dot(dir) / dir.squaredNorm(), 0.0, 1.0);
        const double d2 = (base + t * dir - p).squaredNorm();
        if (d2 < best_d2) {
          best_d2 = d2;
          best_sw = fix_s ? Eigen::Vector2d(fixed, t) : Eigen::Vector2d(t, fixed);
        }
      };
      edge(true, 0.0);
      edge(true, 1.0);
      edge(false, 0.0);
      edge(false, 1.0);
      sw = best_sw;
    }
    const double d = (r.origin + sw.x() * r.e1 + sw.y() * r.e2 - p).norm();
    if (d < best.distance) best = {d, int(k), r.color_at(sw.x(), sw.y())};
  }
  return best;
}

/// Per scan point ground truth, aligned with FrameBundle::scan.
struct ScanTruth
{
  std::vector<Point3> local_position;  // exact point in the local frame
  std::vector<int> surface;
  std::vector<ColorRGB> color;
  std::vector<bool> camera_visible;    // in-image and unobstructed from the camera center
};

struct SyntheticFrame
{
  FrameBundle bundle;
  ScanTruth truth;
  RigidTransform true_pose;  // vehicle -> local without noise
};

inline float luminance(ColorRGB c) { return float((0.299 * c.r + 0.587 * c.g + 0.114 * c.b) / 255.0); }

inline RgbImage render_image(const Scene &scene, const RigidTransform &pose)
{
  const CameraModel cam = scene.camera.model();
  const RigidTransform cam_to_local = pose * cam.extrinsics().inverse();
  const Eigen::Matrix3d k_inv = cam.intrinsics().inverse();
  RgbImage img(cam.width(), cam.height(), scene.camera.background);
  for (int v = 0; v < cam.height(); ++v) {
    for (int u = 0; u < cam.width(); ++u) {
      const Eigen::Vector3d dir_c = k_inv * Eigen::Vector3d(u + 0.5, v + 0.5, 1.0);
      const Hit h = cast_ray(scene, cam_to_local.translation(), cam_to_local.rotation() * dir_c, 1e-9,
                             std::numeric_limits<double>::infinity());
      if (h) img.set(u, v, h.color);
    }
  }
  return img;
}

inline RigidTransform perturb(const RigidTransform &pose, double sigma_t, double sigma_r, std::mt19937 &rng)
{
  std::normal_distribution<double> n(0.0, 1.0);
  const Eigen::Vector3d w(sigma_r * n(rng), sigma_r * n(rng), sigma_r * n(rng));
  const Eigen::Vector3d t(sigma_t * n(rng), sigma_t * n(rng), sigma_t * n(rng));
  const RigidTransform d = RigidTransform::from_axis_angle(w.norm() > 0 ? w : Eigen::Vector3d::UnitZ(), w.norm(), t);
  return d * pose;
}

/// Scan, image and ground truth for trajectory pose `k`. The first frame's raw
/// pose is noise-free; later raw poses carry the configured navigation noise.
inline SyntheticFrame render_synthetic_frame(const Scene &scene, std::size_t k)
{
  if (k >= scene.trajectory.size()) throw std::out_of_range("render_synthetic_frame: pose index out of range");
  const RigidTransform &pose = scene.trajectory[k];
  const CameraModel cam = scene.camera.model();
  const BeamModel &b = scene.beams;
  if (b.rings < 1 || !(b.azimuth_step_deg > 0.0)) throw std::invalid_argument("BeamModel: invalid sampling");

  PointCloud scan(Frame::Vehicle, true, false);
  ScanTruth truth;
  const Point3 cam_center_local = pose * cam.origin();
  const int steps = int(std::lround(360.0 / b.azimuth_step_deg));
  for (int ring = 0; ring < b.rings; ++ring) {
    const double el = deg2rad(b.rings == 1 ? b.min_elevation_deg
                                           : b.min_elevation_deg + (b.max_elevation_deg - b.min_elevation_deg) *
                                                                       ring / double(b.rings - 1));
    for (int a = 0; a < steps; ++a) {
      const double az = deg2rad(a * b.azimuth_step_deg);
      const Eigen::Vector3d dir(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
      const Hit h = cast_ray(scene, pose.translation(), pose.rotation() * dir, b.min_range, b.max_range);
      if (!h) continue;
      const Point3 local = pose.translation() + h.t * (pose.rotation() * dir);
      scan.push_back(h.t * dir, luminance(h.color));
      truth.local_position.push_back(local);
      truth.surface.push_back(h.surface);
      truth.color.push_back(h.color);

      bool visible = false;
      if (cam.project_continuous(h.t * dir)) {
        const Eigen::Vector3d to_point = local - cam_center_local;
        const Hit c = cast_ray(scene, cam_center_local, to_point, 1e-9, 1.0);
        visible = !c || c.t >= 1.0 - 1e-9;
      }
      truth.camera_visible.push_back(visible);
    }
  }

  RigidTransform raw = pose;
  if (k > 0 && (scene.pose_noise_translation > 0.0 || scene.pose_noise_rotation > 0.0)) {
    std::mt19937 rng(scene.seed * 7919u + unsigned(k));
    raw = perturb(pose, scene.pose_noise_translation, scene.pose_noise_rotation, rng);
  }
  SyntheticFrame out{FrameBundle{std::move(scan), render_image(scene, pose), raw, cam, 0.1 * double(k), long(k)},
                     std::move(truth), pose};
  return out;
}

struct SceneError
{
  double mean_distance{0.0};        // meters, map point to nearest surface
  double mean_color_distance{0.0};  // RGB distance to that surface's true color
  std::size_t points{0};
};

/// Scores a local-frame colored cloud against the scene geometry and colors.
inline SceneError scene_error(const Scene &scene, const PointCloud &map)
{
  if (!map.has_color()) throw std::invalid_argument("scene_error: map must carry colors");
  SceneError e;
  e.points = map.size();
  if (map.empty()) return e;
  for (std::size_t i = 0; i < map.size(); ++i) {
    const SurfacePoint sp = nearest_surface(scene, map.point(i));
    e.mean_distance += sp.distance;
    e.mean_color_distance += color_distance(sp.color, map.color(i));
  }
  e.mean_distance /= double(map.size());
  e.mean_color_distance /= double(map.size());
  return e;
}

/// Two parallel textured walls, a ground plane and boxes along both sides;
/// the vehicle drives down the middle at 0.5 m per frame.
inline Scene corridor_scene(std::size_t frames = 20)
{
  Scene s;
  const double ground = -1.73, top = 2.5, len = 60.0;
  s.add_rect({{-10, -4, ground}, {len, 0, 0}, {0, 0, top - ground}, {200, 60, 50}, ColorRGB{170, 80, 60}, 1.0});
  s.add_rect({{-10, 4, ground}, {len, 0, 0}, {0, 0, top - ground}, {50, 90, 200}, ColorRGB{70, 110, 180}, 1.0});
  s.add_rect({{-10, -4, ground}, {len, 0, 0}, {0, 8, 0}, {110, 110, 110}, ColorRGB{130, 130, 120}, 1.0});
  s.add_rect({{45, -4, ground}, {0, 8, 0}, {0, 0, top - ground}, {230, 210, 60}, ColorRGB{200, 190, 90}, 1.0});
  s.add_box({6, -3.8, ground}, {7.2, -2.6, -0.2}, {40, 180, 70});
  s.add_box({11, 2.4, ground}, {12.5, 3.9, 0.6}, {220, 140, 30});
  s.add_box({17, -3.9, ground}, {18, -2.9, 1.2}, {150, 50, 170});
  s.add_box({23, 2.8, ground}, {24.5, 3.9, -0.4}, {30, 170, 170});
  s.add_box({29, -3.7, ground}, {30.5, -2.7, 0.3}, {240, 90, 140});
  for (std::size_t k = 0; k < frames; ++k) {
    s.trajectory.push_back(RigidTransform::from_axis_angle(Eigen::Vector3d::UnitZ(), 0.0,
                                                           Eigen::Vector3d(0.5 * double(k), 0.0, 0.0)));
  }
  return s;
}

/// A thin pole close to the vehicle in front of a textured wall, seen by a
/// camera mounted well off the scanner's axis so that the scanner reaches wall
/// points the camera sees only as pole.
inline Scene occlusion_scene(std::size_t frames = 20)
{
  Scene s;
  const double ground = -1.73;
  s.add_rect({{12, -10, ground}, {0, 20, 0}, {0, 0, 6}, {60, 120, 220}, ColorRGB{90, 150, 230}, 1.0});
  s.add_rect({{-5, -10, ground}, {17, 0, 0}, {0, 20, 0}, {100, 100, 100}, std::nullopt, 1.0});
  s.add_box({6.0, -0.3, ground}, {6.4, 0.3, 3.0}, {250, 220, 20});
  s.add_box({7.5, 1.6, ground}, {8.0, 2.2, 3.0}, {230, 30, 30});
  s.camera.position = Point3(0.27, -0.6, -0.5);
  for (std::size_t k = 0; k < frames; ++k) {
    s.trajectory.push_back(RigidTransform::from_axis_angle(Eigen::Vector3d::UnitZ(), 0.0,
                                                           Eigen::Vector3d(0.1 * double(k), 0.15 * double(k) - 1.5, 0.0)));
  }
  return s;
}

}  // namespace texmap::synth
