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

#include "texmap/foveal.hpp"
#include "texmap/frame.hpp"
#include "texmap/metrics.hpp"
#include "texmap/rayfilter.hpp"
#include "texmap/registration.hpp"
#include "texmap/texture_map.hpp"
#include "texmap/upsampler.hpp"

#include <chrono>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace texmap
{

enum class RegistrationMode
{
  None,      // trust the raw navigation poses
  Baseline,  // ICP on the full raw scans
  Refined    // camera-visible, constrained-upsampled scans
};

inline std::string_view to_string(RegistrationMode m)
{
  switch (m) {
    case RegistrationMode::None: return "none";
    case RegistrationMode::Baseline: return "baseline";
    case RegistrationMode::Refined: return "refined";
  }
  return "?";
}

inline RegistrationMode parse_registration_mode(std::string_view s)
{
  if (s == "none" || s == "raw") return RegistrationMode::None;
  if (s == "baseline") return RegistrationMode::Baseline;
  if (s == "refined") return RegistrationMode::Refined;
  throw std::invalid_argument("unknown registration mode '" + std::string(s) + "' (expected none, baseline or refined)");
}

struct PipelineConfig
{
  IcpConfig icp;
  UpsampleConfig upsample_registration{1, 0.3, true, kDefaultGroundZThreshold};
  UpsampleConfig upsample_texture{1, 0.3, false, kDefaultGroundZThreshold};
  FovealConfig foveal;
  RayFilterConfig rayfilter;
  double ground_z_threshold{kDefaultGroundZThreshold};
  RegistrationMode registration{RegistrationMode::Refined};
  bool foveal_enabled{true};
  bool ray_filter_enabled{true};
  std::string experiment_label{"custom"};

  void validate() const
  {
    icp.validate();
    upsample_registration.validate();
    upsample_texture.validate();
    foveal.validate();
    rayfilter.validate();
  }
};

struct StageTimes
{
  double upsample{0.0};
  double align{0.0};
  double foveal{0.0};
  double rayfilter{0.0};
  double accumulate{0.0};
};

struct FrameStats
{
  long frame_id{0};
  bool registered{false};             // an ICP result was used
  bool registration_fallback{false};  // ICP did not converge; raw relative pose used
  int icp_iterations{0};
  double registration_error{0.0};     // meters, mean inlier correspondence error
  AccumulateStats accumulate;
  std::size_t map_size{0};
  StageTimes times;
};

/// Per-stage seconds averaged over processed frames.
struct TimingReport
{
  StageTimes mean;
  std::size_t frames{0};
};

/// Incremental map builder. Frames must arrive in sequence order.
class Pipeline
{
public:
  explicit Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg))
  {
    cfg_.upsample_registration.constrained = true;
    cfg_.upsample_registration.ground_z_threshold = cfg_.ground_z_threshold;
    cfg_.upsample_texture.constrained = false;
    cfg_.validate();
  }

  const PipelineConfig &config() const { return cfg_; }
  const TexturedMap &map() const { return map_; }
  const std::vector<RigidTransform> &poses() const { return poses_; }
  const std::vector<FrameStats> &frame_stats() const { return stats_; }

  const FrameStats &process(const FrameBundle &frame)
  {
    frame.validate();
    using clock = std::chrono::steady_clock;
    const auto seconds = [](clock::time_point a) { return std::chrono::duration<double>(clock::now() - a).count(); };

    FrameStats st;
    st.frame_id = frame.frame_id;

    // 1. pose
    RigidTransform pose = frame.raw_pose;
    std::optional<PointCloud> reg_cloud;
    if (prev_) {
      const RigidTransform raw_rel = relative_raw_pose(frame, *prev_);
      RigidTransform rel = raw_rel;
      if (cfg_.registration != RegistrationMode::None) {
        RegistrationResult r;
        if (cfg_.registration == RegistrationMode::Refined) {
          auto t0 = clock::now();
          reg_cloud = refinement_cloud(frame, cfg_.upsample_registration);
          if (!prev_reg_cloud_) prev_reg_cloud_ = refinement_cloud(*prev_, cfg_.upsample_registration);
          st.times.upsample += seconds(t0);
          t0 = clock::now();
          r = align(*reg_cloud, *prev_reg_cloud_, raw_rel, cfg_.icp);
          st.times.align = seconds(t0);
        } else {
          const auto t0 = clock::now();
          r = baseline_pose(frame, *prev_, cfg_.icp);
          st.times.align = seconds(t0);
        }
        st.icp_iterations = r.iterations_used;
        st.registration_error = r.mean_correspondence_error;
        if (r.converged) {
          rel = r.transform;
          st.registered = true;
        } else {
          st.registration_fallback = true;
        }
      }
      pose = poses_.back() * rel;
      pose = RigidTransform(pose.rotation(), pose.translation());
    }

    // 2. foveal subsets of the scan and of the map, both in the vehicle frame
    auto t0 = clock::now();
    PointCloud scan_f = cfg_.foveal_enabled ? extract_foveal(frame.scan, frame.cam, cfg_.foveal) : frame.scan;
    const RigidTransform local_to_vehicle = pose.inverse();
    PointCloud map_f(Frame::Vehicle);
    for (std::size_t i = 0; i < map_.size(); ++i) {
      const Point3 q = local_to_vehicle * map_.cloud().point(i);
      if (cfg_.foveal_enabled ? in_foveal_region(q, frame.cam, cfg_.foveal) : project_point(q, frame.cam).has_value()) {
        map_f.push_back(q);
      }
    }
    st.times.foveal = seconds(t0);

    // 3. texture upsampling of the foveal scan, ground included
    t0 = clock::now();
    const PointCloud scan_up = upsample(scan_f, frame.cam, cfg_.upsample_texture);
    st.times.upsample += seconds(t0);

    // 4. ray filtering; 5. texturing and accumulation
    t0 = clock::now();
    const FilterResult filtered = ray_filter(scan_up, map_f, frame.cam, cfg_.rayfilter, cfg_.ray_filter_enabled);
    st.times.rayfilter = seconds(t0);
    t0 = clock::now();
    st.accumulate = texture_accumulate(scan_up, filtered, map_, frame.image, pose, frame.frame_id);
    st.times.accumulate = seconds(t0);
    st.map_size = map_.size();

    poses_.push_back(pose);
    prev_ = frame;
    prev_reg_cloud_ = std::move(reg_cloud);
    stats_.push_back(st);
    return stats_.back();
  }

  TimingReport timing() const
  {
    TimingReport t;
    t.frames = stats_.size();
    if (stats_.empty()) return t;
    for (const auto &s : stats_) {
      t.mean.upsample += s.times.upsample;
      t.mean.align += s.times.align;
      t.mean.foveal += s.times.foveal;
      t.mean.rayfilter += s.times.rayfilter;
      t.mean.accumulate += s.times.accumulate;
    }
    const double n = double(stats_.size());
    t.mean.upsample /= n;
    t.mean.align /= n;
    t.mean.foveal /= n;
    t.mean.rayfilter /= n;
    t.mean.accumulate /= n;
    return t;
  }

private:
  PipelineConfig cfg_;
  TexturedMap map_;
  std::vector<RigidTransform> poses_;
  std::vector<FrameStats> stats_;
  std::optional<FrameBundle> prev_;
  std::optional<PointCloud> prev_reg_cloud_;
};

struct RunResult
{
  TexturedMap map;
  MetricReport report;
  TimingReport timing;
  std::vector<FrameStats> frames;
  std::vector<RigidTransform> poses;
};

/// Texture ground truth of one processed frame, placed with the pipeline's pose.
/// With foveal processing on, only the foveal part of the scan is scored.
inline GroundTruthFrame ground_truth_frame(const FrameBundle &frame, const RigidTransform &pose,
                                           const PipelineConfig &cfg)
{
  PointCloud gt = generate_texture_ground_truth(frame);
  if (cfg.foveal_enabled) gt = extract_foveal(gt, frame.cam, cfg.foveal);
  return {std::move(gt), pose, {}};
}

/// Folds the pipeline over `frames` and scores the map against every frame's
/// texture ground truth. `on_frame` is called after each frame.
inline RunResult run_sequence(const std::vector<FrameBundle> &frames, const PipelineConfig &cfg,
                              const std::function<void(const FrameStats &)> &on_frame = {})
{
  if (frames.empty()) throw std::invalid_argument("run_sequence: no frames");
  Pipeline p(cfg);
  std::vector<GroundTruthFrame> gt;
  for (const auto &f : frames) {
    const auto &st = p.process(f);
    if (on_frame) on_frame(st);
    gt.push_back(ground_truth_frame(f, p.poses().back(), p.config()));
  }
  RunResult out{p.map(), {}, p.timing(), p.frame_stats(), p.poses()};
  if (!out.map.empty()) out.report = evaluate(out.map, gt);
  return out;
}

}  // namespace texmap
