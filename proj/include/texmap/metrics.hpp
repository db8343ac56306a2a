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
#include "texmap/texture_map.hpp"

#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace texmap
{

struct MetricReport
{
  double mu_ME{0.0};     // meters
  double sigma_ME{0.0};  // meters
  double mu_TE{0.0};     // RGB distance
  double sigma_TE{0.0};  // RGB distance
  double mtme{0.0};      // meters x RGB distance
  std::size_t n_scans{0};
  std::size_t N_points{0};
  std::size_t skipped_frames{0};  // ground-truth frames without a pose
};

/// One evaluation frame. A vehicle-frame cloud is carried into the local frame
/// by `pose`; a local-frame cloud is used as is. `mask`, when non-empty, keeps
/// only points flagged true (e.g. to drop moving objects).
struct GroundTruthFrame
{
  PointCloud cloud;
  std::optional<RigidTransform> pose;
  std::vector<bool> mask;
};

/// The raw scan points that land in the image, colored by their pixel (vehicle frame).
inline PointCloud generate_texture_ground_truth(const FrameBundle &bundle)
{
  PointCloud out(Frame::Vehicle, bundle.scan.has_intensity(), true);
  for (std::size_t i = 0; i < bundle.scan.size(); ++i) {
    if (auto p = project_point(bundle.scan.point(i), bundle.cam)) {
      out.push_back(bundle.scan.point(i), bundle.scan.has_intensity() ? bundle.scan.intensity(i) : 0.0f,
                    bundle.image.at(p->pixel));
    }
  }
  return out;
}

/// Texture distance between two attribute slots: Euclidean RGB when both carry
/// color, otherwise |delta intensity| scaled to [0, 255].
inline double texture_distance(const PointCloud &a, std::size_t i, const PointCloud &b, std::size_t j)
{
  if (a.has_color() && b.has_color()) return color_distance(a.color(i), b.color(j));
  if (a.has_intensity() && b.has_intensity()) return std::abs(double(a.intensity(i)) - double(b.intensity(j))) * 255.0;
  throw std::invalid_argument("texture_distance: clouds share neither color nor intensity");
}

/// Map error, texture error and their mean product over every ground-truth
/// point against its nearest map point. Spreads are population deviations.
inline MetricReport evaluate(const PointCloud &map, const KdTree &index, const std::vector<GroundTruthFrame> &frames)
{
  if (map.empty()) throw std::invalid_argument("evaluate: empty map");
  MetricReport rep;
  std::vector<double> me, te;
  for (const auto &f : frames) {
    if (!f.mask.empty() && f.mask.size() != f.cloud.size()) {
      throw std::invalid_argument("evaluate: mask length does not match its cloud");
    }
    RigidTransform to_local;
    if (f.cloud.frame() != Frame::Local) {
      if (!f.pose) {
        ++rep.skipped_frames;
        continue;
      }
      to_local = *f.pose;
    }
    ++rep.n_scans;
    for (std::size_t j = 0; j < f.cloud.size(); ++j) {
      if (!f.mask.empty() && !f.mask[j]) continue;
      const auto nn = index.nearest(to_local * f.cloud.point(j));
      me.push_back(nn.distance);
      te.push_back(texture_distance(f.cloud, j, map, nn.index));
    }
  }
  rep.N_points = me.size();
  if (me.empty()) return rep;

  const auto mean = [](const std::vector<double> &v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
  };
  const auto pop_sd = [](const std::vector<double> &v, double mu) {
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return std::sqrt(s / double(v.size()));
  };
  rep.mu_ME = mean(me);
  rep.sigma_ME = pop_sd(me, rep.mu_ME);
  rep.mu_TE = mean(te);
  rep.sigma_TE = pop_sd(te, rep.mu_TE);
  double prod = 0.0;
  for (std::size_t k = 0; k < me.size(); ++k) prod += me[k] * te[k];
  rep.mtme = prod / double(me.size());
  return rep;
}

inline MetricReport evaluate(const TexturedMap &map, const std::vector<GroundTruthFrame> &frames)
{
  if (map.empty()) throw std::invalid_argument("evaluate: empty map");
  return evaluate(map.cloud(), map.index(), frames);
}

inline MetricReport evaluate(const PointCloud &map, const std::vector<GroundTruthFrame> &frames)
{
  if (map.empty()) throw std::invalid_argument("evaluate: empty map");
  const KdTree index(map.points());
  return evaluate(map, index, frames);
}

/// One "key: value" line per field.
inline void write_report_text(std::ostream &os, const MetricReport &r)
{
  os.precision(17);
  os << "mu_ME: " << r.mu_ME << '\n'
     << "sigma_ME: " << r.sigma_ME << '\n'
     << "mu_TE: " << r.mu_TE << '\n'
     << "sigma_TE: " << r.sigma_TE << '\n'
     << "mtme: " << r.mtme << '\n'
     << "n_scans: " << r.n_scans << '\n'
     << "N_points: " << r.N_points << '\n'
     << "skipped_frames: " << r.skipped_frames << '\n';
}

}  // namespace texmap
