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

// texmap command line: build textured maps from KITTI raw drives or synthetic
// scenes, score maps, and convert point formats.

#include "texmap/texmap.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace
{

using namespace texmap;
using nlohmann::json;

struct CommonOptions
{
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<int> upsample_rate;
  std::optional<int> texture_rate;
  std::optional<double> tau;
  std::optional<std::string> icp_variant;
  std::optional<int> icp_max_iter;
  std::optional<double> icp_max_corr;
  std::optional<double> icp_eps_t;
  std::optional<double> icp_eps_r;
  std::optional<double> z_threshold;
  std::string report_path;
  std::string ply_path;
  bool quiet{false};

  void attach(CLI::App *app)
  {
    app->add_option("-c,--config", config_path, "JSON file of dotted config keys")->check(CLI::ExistingFile);
    app->add_option("--set", sets, "Override a config key (key=value), repeatable");
    app->add_option("--upsample-rate", upsample_rate, "Registration upsampling passes (upsample.rate)");
    app->add_option("--texture-rate", texture_rate, "Texture upsampling passes (upsample.texture_rate)");
    app->add_option("--tau", tau, "Upsampling edge threshold in meters (upsample.tau_m)");
    app->add_option("--icp-variant", icp_variant, "standard | point_to_plane | generalized");
    app->add_option("--icp-max-iter", icp_max_iter, "ICP iteration cap");
    app->add_option("--icp-max-corr-dist", icp_max_corr, "ICP correspondence rejection distance (m)");
    app->add_option("--icp-eps-t", icp_eps_t, "ICP translation convergence threshold (m)");
    app->add_option("--icp-eps-r", icp_eps_r, "ICP rotation convergence threshold (rad)");
    app->add_option("--z-threshold", z_threshold, "Ground cut height in the scanner frame (m)");
    app->add_option("--report", report_path, "Write a key: value report here and per-frame records to <path>.jsonl");
    app->add_option("--ply", ply_path, "Write the map (.ply or .xyzrgb)");
    app->add_flag("-q,--quiet", quiet, "Suppress per-frame progress");
  }

  PipelineConfig build() const
  {
    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    if (upsample_rate) apply_setting(cfg, "upsample.rate", *upsample_rate);
    if (texture_rate) apply_setting(cfg, "upsample.texture_rate", *texture_rate);
    if (tau) apply_setting(cfg, "upsample.tau_m", *tau);
    if (icp_variant) apply_setting(cfg, "icp.variant", *icp_variant);
    if (icp_max_iter) apply_setting(cfg, "icp.max_iter", *icp_max_iter);
    if (icp_max_corr) apply_setting(cfg, "icp.max_corr_dist_m", *icp_max_corr);
    if (icp_eps_t) apply_setting(cfg, "icp.eps_t_m", *icp_eps_t);
    if (icp_eps_r) apply_setting(cfg, "icp.eps_r_rad", *icp_eps_r);
    if (z_threshold) apply_setting(cfg, "ground.z_threshold_m", *z_threshold);
    for (const auto &s : sets) apply_assignment(cfg, s);
    cfg.validate();
    return cfg;
  }
};

json frame_record(const FrameStats &s)
{
  return {{"frame_id", s.frame_id},
          {"registered", s.registered},
          {"registration_fallback", s.registration_fallback},
          {"icp_iterations", s.icp_iterations},
          {"registration_error_m", s.registration_error},
          {"candidates", s.accumulate.candidates},
          {"visible", s.accumulate.visible},
          {"occluding", s.accumulate.occluding},
          {"occluded", s.accumulate.occluded},
          {"out_of_view", s.accumulate.out_of_view},
          {"appended", s.accumulate.appended},
          {"map_size", s.map_size},
          {"t_upsample_s", s.times.upsample},
          {"t_align_s", s.times.align},
          {"t_foveal_s", s.times.foveal},
          {"t_rayfilter_s", s.times.rayfilter},
          {"t_accumulate_s", s.times.accumulate}};
}

json report_record(const MetricReport &r)
{
  return {{"mu_ME", r.mu_ME},       {"sigma_ME", r.sigma_ME}, {"mu_TE", r.mu_TE},
          {"sigma_TE", r.sigma_TE}, {"mtme", r.mtme},         {"n_scans", r.n_scans},
          {"N_points", r.N_points}, {"skipped_frames", r.skipped_frames}};
}

void write_reports(const std::string &path, const MetricReport &r, const json &extra,
                   const std::vector<FrameStats> &frames)
{
  if (path.empty()) return;
  {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report " + path);
    write_report_text(out, r);
    for (const auto &[k, v] : extra.items()) out << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  }
  std::ofstream jl(path + ".jsonl");
  if (!jl) throw std::runtime_error("cannot write report " + path + ".jsonl");
  for (const auto &f : frames) {
    json rec = frame_record(f);
    rec["record"] = "frame";
    jl << rec.dump() << '\n';
  }
  json summary = report_record(r);
  summary.update(extra, true);
  summary["record"] = "summary";
  jl << summary.dump() << '\n';
}

void print_summary(const RunResult &res, const PipelineConfig &cfg)
{
  std::printf("experiment: %s\n", cfg.experiment_label.c_str());
  std::printf("frames: %zu  map points: %zu\n", res.frames.size(), res.map.size());
  std::printf("mu_ME %.6f m  sigma_ME %.6f m  mu_TE %.4f  sigma_TE %.4f  MTME %.6f  (N = %zu)\n", res.report.mu_ME,
              res.report.sigma_ME, res.report.mu_TE, res.report.sigma_TE, res.report.mtme, res.report.N_points);
  const auto &t = res.timing.mean;
  std::printf("mean s/frame: upsample %.4f  align %.4f  foveal %.4f  rayfilter %.4f\n", t.upsample, t.align, t.foveal,
              t.rayfilter);
}

json timing_record(const TimingReport &t)
{
  return {{"mean_t_upsample_s", t.mean.upsample},
          {"mean_t_align_s", t.mean.align},
          {"mean_t_foveal_s", t.mean.foveal},
          {"mean_t_rayfilter_s", t.mean.rayfilter},
          {"mean_t_accumulate_s", t.mean.accumulate}};
}

std::function<void(const FrameStats &)> progress(bool quiet)
{
  if (quiet) return {};
  return [](const FrameStats &s) {
    std::fprintf(stderr, "frame %ld: +%zu points (occluding %zu, occluded %zu)%s map %zu\n", s.frame_id,
                 s.accumulate.appended, s.accumulate.occluding, s.accumulate.occluded,
                 s.registration_fallback ? " [registration fallback]" : "", s.map_size);
  };
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"texmap: textured point-cloud maps from LIDAR, camera and navigation data"};
  app.require_subcommand(1);

  CommonOptions run_opts, synth_opts;
  std::string drive;
  std::size_t first = 0, count = 0;
  int camera = 2;
  auto *run = app.add_subcommand("run", "Build a map from a KITTI raw drive directory");
  run->add_option("drive", drive, "Drive directory (…/<date>_drive_<id>_sync)")->required()->check(CLI::ExistingDirectory);
  run->add_option("--first", first, "First frame index");
  run->add_option("--count", count, "Number of frames (0 = all)");
  run->add_option("--camera", camera, "Color camera index (2 or 3)");
  run_opts.attach(run);

  std::string scene_name = "corridor";
  std::size_t frames_n = 20;
  double noise_t = 0.0, noise_r = 0.0;
  auto *synth = app.add_subcommand("synth", "Generate a synthetic scene and build its map");
  synth->add_option("--scene", scene_name, "corridor | occlusion | path to a scene JSON");
  synth->add_option("--frames", frames_n, "Frames for the built-in scenes");
  synth->add_option("--noise-t", noise_t, "Raw pose translation noise std-dev (m)");
  synth->add_option("--noise-r", noise_r, "Raw pose rotation noise std-dev (rad)");
  synth_opts.attach(synth);

  std::string map_path, report_path;
  std::vector<std::string> gt_paths;
  auto *eval = app.add_subcommand("eval", "Score a map against local-frame ground-truth clouds");
  eval->add_option("map", map_path, "Map (.ply or .xyzrgb)")->required()->check(CLI::ExistingFile);
  eval->add_option("ground_truth", gt_paths, "Ground-truth clouds (.ply or .xyzrgb)")->required()->check(CLI::ExistingFile);
  eval->add_option("--report", report_path, "Write a key: value report here and a summary to <path>.jsonl");

  std::string in_path, out_path;
  auto *exp = app.add_subcommand("export", "Convert between .ply and .xyzrgb");
  exp->add_option("input", in_path)->required()->check(CLI::ExistingFile);
  exp->add_option("output", out_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const PipelineConfig cfg = run_opts.build();
      const auto bundles = kitti::load_kitti_sequence(drive, {first, count, camera});
      std::fprintf(stderr, "loaded %zu frames from %s\n", bundles.size(), drive.c_str());
      const RunResult res = run_sequence(bundles, cfg, progress(run_opts.quiet));
      print_summary(res, cfg);
      json extra = timing_record(res.timing);
      extra["experiment"] = cfg.experiment_label;
      extra["config"] = to_json(cfg).dump();
      write_reports(run_opts.report_path, res.report, extra, res.frames);
      if (!run_opts.ply_path.empty()) export_map(res.map, run_opts.ply_path, format_from_path(run_opts.ply_path));
    } else if (synth->parsed()) {
      const PipelineConfig cfg = synth_opts.build();
      synth::Scene scene = scene_name == "corridor"    ? synth::corridor_scene(frames_n)
                           : scene_name == "occlusion" ? synth::occlusion_scene(frames_n)
                                                       : synth::load_scene(scene_name);
      if (noise_t > 0.0) scene.pose_noise_translation = noise_t;
      if (noise_r > 0.0) scene.pose_noise_rotation = noise_r;
      std::vector<FrameBundle> bundles;
      for (std::size_t k = 0; k < scene.trajectory.size(); ++k) {
        bundles.push_back(synth::render_synthetic_frame(scene, k).bundle);
      }
      const RunResult res = run_sequence(bundles, cfg, progress(synth_opts.quiet));
      print_summary(res, cfg);
      const auto se = synth::scene_error(scene, res.map.cloud());
      std::printf("scene oracle: mean surface distance %.6f m  mean color error %.4f\n", se.mean_distance,
                  se.mean_color_distance);
      json extra = timing_record(res.timing);
      extra["experiment"] = cfg.experiment_label;
      extra["scene_mean_distance_m"] = se.mean_distance;
      extra["scene_mean_color_error"] = se.mean_color_distance;
      write_reports(synth_opts.report_path, res.report, extra, res.frames);
      if (!synth_opts.ply_path.empty()) export_map(res.map, synth_opts.ply_path, format_from_path(synth_opts.ply_path));
    } else if (eval->parsed()) {
      const PointCloud map = read_cloud(map_path, format_from_path(map_path));
      std::vector<GroundTruthFrame> gt;
      for (const auto &p : gt_paths) gt.push_back({read_cloud(p, format_from_path(p)), std::nullopt, {}});
      const MetricReport r = evaluate(map, gt);
      write_report_text(std::cout, r);
      write_reports(report_path, r, json::object(), {});
    } else if (exp->parsed()) {
      const PointCloud cloud = read_cloud(in_path, format_from_path(in_path));
      write_cloud(out_path, cloud, format_from_path(out_path));
      std::fprintf(stderr, "wrote %zu points to %s\n", cloud.size(), out_path.c_str());
    }
  } catch (const std::exception &e) {
    std::fprintf(stderr, "texmap: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
