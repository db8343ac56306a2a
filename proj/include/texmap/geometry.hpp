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

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace texmap
{

/// 3D point in meters. The frame it lives in is carried by the owning cloud.
using Point3 = Eigen::Vector3d;

struct ColorRGB
{
  std::uint8_t r{0};
  std::uint8_t g{0};
  std::uint8_t b{0};

  friend bool operator==(const ColorRGB &, const ColorRGB &) = default;
};

/// Euclidean distance between two colors in RGB space, range [0, 255*sqrt(3)].
inline double color_distance(const ColorRGB &a, const ColorRGB &b)
{
  const double dr = double(a.r) - double(b.r);
  const double dg = double(a.g) - double(b.g);
  const double db = double(a.b) - double(b.b);
  return std::sqrt(dr * dr + dg * dg + db * db);
}

enum class Frame { Vehicle, Local, Camera };

inline const char *to_string(Frame f)
{
  switch (f) {
    case Frame::Vehicle: return "vehicle";
    case Frame::Local: return "local";
    case Frame::Camera: return "camera";
  }
  return "unknown";
}

inline bool is_finite(const Point3 &p)
{
  return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

/// Ordered point set with optional per-point intensity and color.
///
/// Which attributes a cloud carries and which frame it is expressed in are
/// fixed at construction. Every push validates the point, so a cloud never
/// holds NaN or Inf coordinates.
class PointCloud
{
public:
  explicit PointCloud(Frame frame = Frame::Vehicle, bool with_intensity = false, bool with_color = false)
  : frame_(frame), has_intensity_(with_intensity), has_color_(with_color)
  {
  }

  Frame frame() const { return frame_; }
  bool has_intensity() const { return has_intensity_; }
  bool has_color() const { return has_color_; }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  const std::vector<Point3> &points() const { return points_; }
  const std::vector<float> &intensities() const { return intensities_; }
  const std::vector<ColorRGB> &colors() const { return colors_; }

  const Point3 &point(std::size_t i) const { return points_[i]; }
  float intensity(std::size_t i) const { return intensities_.at(i); }
  const ColorRGB &color(std::size_t i) const { return colors_.at(i); }

  void reserve(std::size_t n)
  {
    points_.reserve(n);
    if (has_intensity_) intensities_.reserve(n);
    if (has_color_) colors_.reserve(n);
  }

  /// Appends a point; attributes the cloud does not carry are ignored.
  void push_back(const Point3 &p, float intensity = 0.0f, ColorRGB color = {})
  {
    if (!is_finite(p)) {
      throw std::invalid_argument("PointCloud: non-finite point rejected");
    }
    if (has_intensity_ && !(intensity >= 0.0f && intensity <= 1.0f)) {
      throw std::invalid_argument("PointCloud: intensity outside [0, 1]: " + std::to_string(intensity));
    }
    points_.push_back(p);
    if (has_intensity_) intensities_.push_back(intensity);
    if (has_color_) colors_.push_back(color);
  }

  /// Appends point i of `other` with its attributes.
  void push_from(const PointCloud &other, std::size_t i)
  {
    push_back(other.points_[i],
      other.has_intensity_ ? other.intensities_[i] : 0.0f,
      other.has_color_ ? other.colors_[i] : ColorRGB{});
  }

  /// New cloud of the same frame/attributes holding the listed points in order.
  PointCloud subset(std::span<const std::size_t> indices) const
  {
    PointCloud out(frame_, has_intensity_, has_color_);
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_from(*this, i);
    return out;
  }

  /// Same points re-declared in another frame (no coordinate change).
  PointCloud relabeled(Frame frame) const
  {
    PointCloud out = *this;
    out.frame_ = frame;
    return out;
  }

  void append(const PointCloud &other)
  {
    if (other.frame_ != frame_) {
      throw std::invalid_argument(std::string("PointCloud::append: frame mismatch (") + to_string(frame_) + " vs " +
                                  to_string(other.frame_) + ")");
    }
    reserve(size() + other.size());
    for (std::size_t i = 0; i < other.size(); ++i) push_from(other, i);
  }

private:
  Frame frame_;
  bool has_intensity_;
  bool has_color_;
  std::vector<Point3> points_;
  std::vector<float> intensities_;
  std::vector<ColorRGB> colors_;
};

/// SE(3) element: p -> R p + t.
class RigidTransform
{
public:
  static constexpr double kOrthonormalTolerance = 1e-9;

  RigidTransform() : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}

  RigidTransform(const Eigen::Matrix3d &rotation, const Eigen::Vector3d &translation)
  : rotation_(rotation), translation_(translation)
  {
    if (!rotation.allFinite() || !translation.allFinite()) {
      throw std::invalid_argument("RigidTransform: non-finite entries");
    }
    const double err = (rotation * rotation.transpose() - Eigen::Matrix3d::Identity()).norm();
    if (err > kOrthonormalTolerance || rotation.determinant() <= 0.0) {
      throw std::invalid_argument("RigidTransform: rotation is not a proper orthonormal matrix (|R R^T - I| = " +
                                  std::to_string(err) + ")");
    }
  }

  static RigidTransform from_matrix(const Eigen::Matrix4d &m)
  {
    if (std::abs(m(3, 0)) + std::abs(m(3, 1)) + std::abs(m(3, 2)) + std::abs(m(3, 3) - 1.0) > 1e-12) {
      throw std::invalid_argument("RigidTransform: bottom row of homogeneous matrix must be [0 0 0 1]");
    }
    return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
  }

  /// Rotation about `axis` (normalized internally) by `angle` radians, then translation.
  static RigidTransform from_axis_angle(const Eigen::Vector3d &axis, double angle,
                                        const Eigen::Vector3d &translation = Eigen::Vector3d::Zero())
  {
    return {Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(), translation};
  }

  /// Exponential of a (rotation-vector, translation) pair; the translation is applied as-is.
  static RigidTransform from_rotation_vector(const Eigen::Vector3d &omega, const Eigen::Vector3d &translation)
  {
    const double angle = omega.norm();
    if (angle < 1e-300) return unchecked(Eigen::Matrix3d::Identity(), translation);
    return unchecked(Eigen::AngleAxisd(angle, omega / angle).toRotationMatrix(), translation);
  }

  static RigidTransform identity() { return {}; }

  const Eigen::Matrix3d &rotation() const { return rotation_; }
  const Eigen::Vector3d &translation() const { return translation_; }

  Eigen::Matrix4d matrix() const
  {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation_;
    m.topRightCorner<3, 1>() = translation_;
    return m;
  }

  /// Rotation angle in radians, in [0, pi].
  double angle() const
  {
    const double c = std::clamp((rotation_.trace() - 1.0) * 0.5, -1.0, 1.0);
    return std::acos(c);
  }

  Point3 operator*(const Point3 &p) const { return rotation_ * p + translation_; }

  /// Composition: (a * b)(p) == a(b(p)).
  RigidTransform operator*(const RigidTransform &o) const
  {
    return unchecked(rotation_ * o.rotation_, rotation_ * o.translation_ + translation_);
  }

  RigidTransform inverse() const
  {
    const Eigen::Matrix3d rt = rotation_.transpose();
    return unchecked(rt, -(rt * translation_));
  }

  bool is_valid() const
  {
    return (rotation_ * rotation_.transpose() - Eigen::Matrix3d::Identity()).norm() <= kOrthonormalTolerance &&
           rotation_.determinant() > 0.0 && translation_.allFinite();
  }

private:
  static RigidTransform unchecked(const Eigen::Matrix3d &r, const Eigen::Vector3d &t)
  {
    RigidTransform out;
    out.rotation_ = r;
    out.translation_ = t;
    return out;
  }

  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

/// Applies `transform` to every point. Attributes are carried through and the
/// result is declared to be in `out_frame`.
inline PointCloud transform_cloud(const PointCloud &cloud, const RigidTransform &transform, Frame out_frame)
{
  PointCloud out(out_frame, cloud.has_intensity(), cloud.has_color());
  out.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    out.push_back(transform * cloud.point(i), cloud.has_intensity() ? cloud.intensity(i) : 0.0f,
                  cloud.has_color() ? cloud.color(i) : ColorRGB{});
  }
  return out;
}

struct Pixel
{
  int u{0};  // column
  int v{0};  // row

  friend bool operator==(const Pixel &, const Pixel &) = default;
};

struct Projection
{
  Pixel pixel;
  double ray_length{0.0};  // meters, camera optical center to the point
};

/// Pinhole camera: intrinsics K and extrinsics mapping the source frame into
/// the camera frame. No distortion model; rectified images are assumed.
class CameraModel
{
public:
  CameraModel(const Eigen::Matrix3d &intrinsics, const RigidTransform &extrinsics, int width, int height)
  : K_(intrinsics), extrinsics_(extrinsics), width_(width), height_(height)
  {
    if (width <= 0 || height <= 0) {
      throw std::invalid_argument("CameraModel: image dimensions must be positive");
    }
    if (K_(2, 2) != 1.0 || K_(1, 0) != 0.0 || K_(2, 0) != 0.0 || K_(2, 1) != 0.0) {
      throw std::invalid_argument("CameraModel: K must be upper triangular with K(2,2) == 1");
    }
    if (!(K_(0, 0) > 0.0) || !(K_(1, 1) > 0.0) || !K_.allFinite()) {
      throw std::invalid_argument("CameraModel: focal lengths must be strictly positive");
    }
  }

  static CameraModel from_pinhole(double fx, double fy, double cx, double cy, int width, int height,
                                  const RigidTransform &extrinsics = {})
  {
    Eigen::Matrix3d k;
    k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
    return {k, extrinsics, width, height};
  }

  const Eigen::Matrix3d &intrinsics() const { return K_; }
  const RigidTransform &extrinsics() const { return extrinsics_; }
  int width() const { return width_; }
  int height() const { return height_; }
  double fx() const { return K_(0, 0); }
  double fy() const { return K_(1, 1); }
  double cx() const { return K_(0, 2); }
  double cy() const { return K_(1, 2); }

  /// Camera optical center expressed in the source frame.
  Point3 origin() const { return -(extrinsics_.rotation().transpose() * extrinsics_.translation()); }

  Point3 to_camera(const Point3 &p) const { return extrinsics_ * p; }

  /// Continuous image coordinates (u, v) of a point in front of the camera
  /// that lands inside [0, width) x [0, height); absent otherwise.
  std::optional<Eigen::Vector2d> project_continuous(const Point3 &p) const
  {
    const Point3 pc = to_camera(p);
    if (!(pc.z() > 0.0)) return std::nullopt;
    const Eigen::Vector3d h = K_ * pc;
    const Eigen::Vector2d uv(h.x() / h.z(), h.y() / h.z());
    if (!(uv.x() >= 0.0 && uv.x() < width_ && uv.y() >= 0.0 && uv.y() < height_)) return std::nullopt;
    return uv;
  }

  bool contains(const Pixel &px) const { return px.u >= 0 && px.u < width_ && px.v >= 0 && px.v < height_; }

  /// A new camera observing the same image from a differently expressed source frame:
  /// `source_to_old` maps the new source frame into the old one.
  CameraModel reframed(const RigidTransform &source_to_old) const
  {
    return {K_, extrinsics_ * source_to_old, width_, height_};
  }

private:
  Eigen::Matrix3d K_;
  RigidTransform extrinsics_;
  int width_;
  int height_;
};

/// Projects P through K[R|t]. The pixel is the floor of the dehomogenized
/// coordinates; the ray length is the Euclidean distance from the camera
/// optical center. Absent when the point is behind the camera or off-image.
inline std::optional<Projection> project_point(const Point3 &p, const CameraModel &cam)
{
  const Point3 pc = cam.to_camera(p);
  if (!(pc.z() > 0.0)) return std::nullopt;
  const Eigen::Vector3d h = cam.intrinsics() * pc;
  const double u = std::floor(h.x() / h.z());
  const double v = std::floor(h.y() / h.z());
  if (!(u >= 0.0 && u < cam.width() && v >= 0.0 && v < cam.height())) return std::nullopt;
  return Projection{Pixel{int(u), int(v)}, pc.norm()};
}

}  // namespace texmap
