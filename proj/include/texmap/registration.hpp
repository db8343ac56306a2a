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

#include "texmap/frame.hpp"
#include "texmap/geometry.hpp"
#include "texmap/kdtree.hpp"
#include "texmap/upsampler.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace texmap
{

enum class IcpVariant
{
  Standard,
  PointToPlane,
  Generalized
};

inline std::string_view to_string(IcpVariant v)
{
  switch (v) {
    case IcpVariant::Standard: return "standard";
    case IcpVariant::PointToPlane: return "point_to_plane";
    case IcpVariant::Generalized: return "generalized";
  }
  return "?";
}

inline IcpVariant parse_icp_variant(std::string_view s)
{
  if (s == "standard" || s == "std" || s == "STD") return IcpVariant::Standard;
  if (s == "point_to_plane" || s == "p2p" || s == "P2P") return IcpVariant::PointToPlane;
  if (s == "generalized" || s == "gicp" || s == "GICP" || s == "gen") return IcpVariant::Generalized;
  throw std::invalid_argument("unknown ICP variant '" + std::string(s) +
                              "' (expected standard, point_to_plane or generalized)");
}

struct IcpConfig
{
  IcpVariant variant{IcpVariant::Generalized};
  int max_iterations{50};
  double correspondence_max_distance{1.0};  // meters
  double convergence_translation_eps{1e-5};  // meters
  double convergence_rotation_eps{1e-5};     // radians
  double gicp_covariance_epsilon{1e-3};
  int normal_estimation_k{20};

  void validate() const
  {
    if (max_iterations < 1) throw std::invalid_argument("IcpConfig: max_iterations must be >= 1");
    if (!(correspondence_max_distance > 0.0)) {
      throw std::invalid_argument("IcpConfig: correspondence_max_distance must be > 0");
    }
    if (!(convergence_translation_eps > 0.0) || !(convergence_rotation_eps > 0.0) ||
        !(gicp_covariance_epsilon > 0.0)) {
      throw std::invalid_argument("IcpConfig: epsilons must be > 0");
    }
    if (normal_estimation_k < 3) throw std::invalid_argument("IcpConfig: normal_estimation_k must be >= 3");
  }
};

/// Objective (mean over inlier correspondences) before and after one update.
struct IcpIteration
{
  double objective_before;
  double objective_after;
  std::size_t inliers;
};

struct RegistrationResult
{
  RigidTransform transform;  // source -> target
  bool converged{false};
  int iterations_used{0};
  double mean_correspondence_error{0.0};  // meters, source -> target inliers after alignment
  double elapsed{0.0};                    // seconds
  std::vector<IcpIteration> history;
};

namespace detail
{

inline Eigen::Matrix3d skew(const Eigen::Vector3d &v)
{
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

/// Covariance of the k nearest neighbors of every point (the point itself included).
inline std::vector<Eigen::Matrix3d> neighborhood_covariances(const std::vector<Point3> &pts, const KdTree &tree,
                                                             int k)
{
  std::vector<Eigen::Matrix3d> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto nn = tree.knn(pts[i], std::size_t(k));
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto &n : nn) mean += tree.point(n.index);
    mean /= double(nn.size());
    Eigen::Matrix3d c = Eigen::Matrix3d::Zero();
    for (const auto &n : nn) {
      const Eigen::Vector3d d = tree.point(n.index) - mean;
      c += d * d.transpose();
    }
    out[i] = c / double(nn.size());
  }
  return out;
}

}  // namespace detail

/// Unit normal of the least-variance direction of each covariance.
inline std::vector<Eigen::Vector3d> estimate_normals(const std::vector<Point3> &pts, int k)
{
  const KdTree tree(pts);
  const auto covs = detail::neighborhood_covariances(pts, tree, k);
  std::vector<Eigen::Vector3d> normals(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(covs[i]);
    normals[i] = es.eigenvectors().col(0).normalized();
  }
  return normals;
}

/// Per-point covariances with eigenvalues replaced by (epsilon, 1, 1), smallest first.
inline std::vector<Eigen::Matrix3d> regularized_covariances(const std::vector<Point3> &pts, int k, double epsilon)
{
  const KdTree tree(pts);
  auto covs = detail::neighborhood_covariances(pts, tree, k);
  const Eigen::Vector3d spectrum(epsilon, 1.0, 1.0);
  for (auto &c : covs) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(c);
    const Eigen::Matrix3d u = es.eigenvectors();
    c = u * spectrum.asDiagonal() * u.transpose();
    c = 0.5 * (c + c.transpose());
  }
  return covs;
}

/// Closed-form least-squares rigid motion taking `from[i]` onto `to[i]`.
inline RigidTransform kabsch(const std::vector<Point3> &from, const std::vector<Point3> &to)
{
  if (from.size() != to.size() || from.empty()) throw std::invalid_argument("kabsch: size mismatch or empty");
  Eigen::Vector3d ca = Eigen::Vector3d::Zero(), cb = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < from.size(); ++i) {
    ca += from[i];
    cb += to[i];
  }
  ca /= double(from.size());
  cb /= double(from.size());
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < from.size(); ++i) h += (from[i] - ca) * (to[i] - cb).transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  Eigen::Matrix3d r = svd.matrixV() * d * svd.matrixU().transpose();
  // Re-orthonormalize so accumulated round-off never trips the validity check.
  Eigen::JacobiSVD<Eigen::Matrix3d> clean(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  r = clean.matrixU() * clean.matrixV().transpose();
  return {r, cb - r * ca};
}

namespace detail
{

class IcpProblem
{
public:
  IcpProblem(const PointCloud &source, const PointCloud &target, const IcpConfig &cfg)
  : cfg_(cfg), src_(source.points()), tgt_(target.points()), tree_(tgt_)
  {
    if (cfg.variant == IcpVariant::PointToPlane) {
      normals_ = estimate_normals(tgt_, cfg.normal_estimation_k);
    } else if (cfg.variant == IcpVariant::Generalized) {
      src_cov_ = regularized_covariances(src_, cfg.normal_estimation_k, cfg.gicp_covariance_epsilon);
      tgt_cov_ = regularized_covariances(tgt_, cfg.normal_estimation_k, cfg.gicp_covariance_epsilon);
    }
  }

  struct Pair
  {
    std::uint32_t s;
    std::uint32_t t;
  };

  std::vector<Pair> correspond(const RigidTransform &T) const
  {
    std::vector<Pair> pairs;
    pairs.reserve(src_.size());
    const double max_d = cfg_.correspondence_max_distance;
    for (std::size_t i = 0; i < src_.size(); ++i) {
      const auto nn = tree_.nearest(T * src_[i]);
      if (nn.distance <= max_d) pairs.push_back({std::uint32_t(i), std::uint32_t(nn.index)});
    }
    return pairs;
  }

  double objective(const RigidTransform &T, const std::vector<Pair> &pairs) const
  {
    double sum = 0.0;
    const Eigen::Matrix3d &r = T.rotation();
    for (const auto &p : pairs) {
      const Eigen::Vector3d d = tgt_[p.t] - T * src_[p.s];
      switch (cfg_.variant) {
        case IcpVariant::Standard: sum += d.squaredNorm(); break;
        case IcpVariant::PointToPlane: {
          const double e = normals_[p.t].dot(d);
          sum += e * e;
          break;
        }
        case IcpVariant::Generalized: {
          const Eigen::Matrix3d c = tgt_cov_[p.t] + r * src_cov_[p.s] * r.transpose();
          sum += d.dot(c.ldlt().solve(d));
          break;
        }
      }
    }
    return sum / double(pairs.size());
  }

  /// Proposed left-multiplied increment for fixed correspondences.
  RigidTransform step(const RigidTransform &T, const std::vector<Pair> &pairs) const
  {
    if (cfg_.variant == IcpVariant::Standard) {
      std::vector<Point3> from, to;
      from.reserve(pairs.size());
      to.reserve(pairs.size());
      for (const auto &p : pairs) {
        from.push_back(T * src_[p.s]);
        to.push_back(tgt_[p.t]);
      }
      return kabsch(from, to);
    }

    Eigen::Matrix<double, 6, 6> H = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
    const Eigen::Matrix3d &r = T.rotation();
    for (const auto &p : pairs) {
      const Point3 q = T * src_[p.s];
      if (cfg_.variant == IcpVariant::PointToPlane) {
        // residual n.(q' - t) with q' = q + w x q + v
        const Eigen::Vector3d &n = normals_[p.t];
        Eigen::Matrix<double, 6, 1> a;
        a << q.cross(n), n;
        H += a * a.transpose();
        g += a * n.dot(q - tgt_[p.t]);
      } else {
        // residual t - q' = d + [q]x w - v, weighted by the combined covariance
        const Eigen::Matrix3d m = (tgt_cov_[p.t] + r * src_cov_[p.s] * r.transpose()).inverse();
        Eigen::Matrix<double, 3, 6> J;
        J << skew(q), -Eigen::Matrix3d::Identity();
        const Eigen::Vector3d d = tgt_[p.t] - q;
        H += J.transpose() * m * J;
        g += J.transpose() * m * d;
      }
    }
    const double lambda = 1e-12 * std::max(H.trace(), 1.0);
    H.diagonal().array() += lambda;
    const Eigen::Matrix<double, 6, 1> x = -H.ldlt().solve(g);
    if (!x.allFinite()) return RigidTransform::identity();
    return RigidTransform::from_rotation_vector(x.head<3>(), x.tail<3>());
  }

  double mean_nn_error(const RigidTransform &T) const
  {
    double inlier_sum = 0.0, all_sum = 0.0;
    std::size_t inliers = 0;
    for (const auto &s : src_) {
      const double d = tree_.nearest(T * s).distance;
      all_sum += d;
      if (d <= cfg_.correspondence_max_distance) {
        inlier_sum += d;
        ++inliers;
      }
    }
    return inliers ? inlier_sum / double(inliers) : all_sum / double(src_.size());
  }

private:
  IcpConfig cfg_;
  const std::vector<Point3> &src_;
  const std::vector<Point3> &tgt_;
  KdTree tree_;
  std::vector<Eigen::Vector3d> normals_;
  std::vector<Eigen::Matrix3d> src_cov_;
  std::vector<Eigen::Matrix3d> tgt_cov_;
};

inline RigidTransform scaled(const RigidTransform &delta, double alpha)
{
  const Eigen::AngleAxisd aa(delta.rotation());
  return RigidTransform::from_rotation_vector(aa.axis() * aa.angle() * alpha, delta.translation() * alpha);
}

}  // namespace detail

/// Iterative closest point alignment of `source` onto `target`.
///
/// Every iteration re-establishes nearest-neighbor correspondences (pairs
/// farther than correspondence_max_distance are dropped) and then improves the
/// variant's objective for those fixed pairs: closed-form SVD for Standard,
/// small-angle Gauss-Newton with a backtracking step for the other two.
inline RegistrationResult align(const PointCloud &source, const PointCloud &target,
                                const RigidTransform &initial_guess, const IcpConfig &cfg)
{
  cfg.validate();
  if (source.empty() || target.empty()) throw std::invalid_argument("align: source and target must be non-empty");
  if (!initial_guess.is_valid()) throw std::invalid_argument("align: invalid initial guess");
  const auto start = std::chrono::steady_clock::now();

  const detail::IcpProblem problem(source, target, cfg);
  RegistrationResult result;
  RigidTransform T = initial_guess;

  for (int it = 0; it < cfg.max_iterations; ++it) {
    const auto pairs = problem.correspond(T);
    if (pairs.size() < 3) break;
    result.iterations_used = it + 1;

    const double before = problem.objective(T, pairs);
    const RigidTransform delta = problem.step(T, pairs);
    RigidTransform accepted = RigidTransform::identity();
    double after = before;
    for (int halving = 0; halving < 30; ++halving) {
      const RigidTransform trial = halving == 0 ? delta : detail::scaled(delta, std::ldexp(1.0, -halving));
      const double f = problem.objective(trial * T, pairs);
      if (f <= before) {
        accepted = trial;
        after = f;
        break;
      }
    }
    T = accepted * T;
    result.history.push_back({before, after, pairs.size()});

    if (accepted.translation().norm() < cfg.convergence_translation_eps &&
        accepted.angle() < cfg.convergence_rotation_eps) {
      result.converged = true;
      break;
    }
  }

  result.transform = RigidTransform(T.rotation(), T.translation());
  result.mean_correspondence_error = problem.mean_nn_error(result.transform);
  result.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

/// Points of `scan` whose projection lands inside the camera image.
inline PointCloud camera_visible(const PointCloud &scan, const CameraModel &cam)
{
  PointCloud out(scan.frame(), scan.has_intensity(), scan.has_color());
  for (std::size_t i = 0; i < scan.size(); ++i) {
    if (cam.project_continuous(scan.point(i))) out.push_from(scan, i);
  }
  return out;
}

/// Raw relative pose mapping `source`'s vehicle frame into `target`'s.
inline RigidTransform relative_raw_pose(const FrameBundle &source, const FrameBundle &target)
{
  return target.raw_pose.inverse() * source.raw_pose;
}

/// Registration input for one frame: camera-visible points, non-ground part upsampled.
inline PointCloud refinement_cloud(const FrameBundle &frame, UpsampleConfig up)
{
  up.constrained = true;
  return upsample(camera_visible(frame.scan, frame.cam), frame.cam, up);
}

/// Aligns consecutive frames after constrained upsampling; the result maps
/// `source`'s vehicle frame into `target`'s.
inline RegistrationResult refine_pose(const FrameBundle &source, const FrameBundle &target, const IcpConfig &cfg,
                                      const UpsampleConfig &up)
{
  return align(refinement_cloud(source, up), refinement_cloud(target, up), relative_raw_pose(source, target), cfg);
}

/// Plain scan matching of the full raw scans from the raw-pose guess.
inline RegistrationResult baseline_pose(const FrameBundle &source, const FrameBundle &target, const IcpConfig &cfg)
{
  return align(source.scan, target.scan, relative_raw_pose(source, target), cfg);
}

}  // namespace texmap
