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

// Flat dotted-key configuration, e.g. {"icp.variant": "gicp", "upsample.rate": 2}.

#include "texmap/pipeline.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace texmap
{

inline const std::vector<std::string> &config_keys()
{
  static const std::vector<std::string> keys = {
      "ground.z_threshold_m", "upsample.rate",        "upsample.tau_m",         "upsample.texture_rate",
      "icp.variant",          "icp.max_iter",         "icp.max_corr_dist_m",    "icp.eps_t_m",
      "icp.eps_r_rad",        "icp.gicp_epsilon",     "icp.normal_k",           "foveal.near_m",
      "foveal.far_m",         "foveal.h_half_angle_deg", "foveal.v_half_angle_deg", "rayfilter.window_M",
      "rayfilter.c",          "pipeline.registration", "pipeline.foveal",       "pipeline.ray_filter",
      "experiment.label"};
  return keys;
}

namespace detail
{

inline double as_number(const nlohmann::json &v, const std::string &key)
{
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      std::size_t used = 0;
      const double d = std::stod(v.get<std::string>(), &used);
      if (used == v.get<std::string>().size()) return d;
    } catch (const std::exception &) {
    }
  }
  throw std::invalid_argument("config: '" + key + "' expects a number, got " + v.dump());
}

inline int as_int(const nlohmann::json &v, const std::string &key)
{
  const double d = as_number(v, key);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw std::invalid_argument("config: '" + key + "' expects an integer");
  return int(d);
}

inline bool as_bool(const nlohmann::json &v, const std::string &key)
{
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "true" || s == "on" || s == "1") return true;
    if (s == "false" || s == "off" || s == "0") return false;
  }
  if (v.is_number_integer()) return v.get<int>() != 0;
  throw std::invalid_argument("config: '" + key + "' expects a boolean, got " + v.dump());
}

inline std::string as_string(const nlohmann::json &v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace detail

/// Sets one dotted key; unknown keys are an error.
inline void apply_setting(PipelineConfig &cfg, const std::string &key, const nlohmann::json &v)
{
  using namespace detail;
  if (key == "ground.z_threshold_m") {
    cfg.ground_z_threshold = as_number(v, key);
    cfg.upsample_registration.ground_z_threshold = cfg.ground_z_threshold;
    cfg.upsample_texture.ground_z_threshold = cfg.ground_z_threshold;
  } else if (key == "upsample.rate") {
    cfg.upsample_registration.rate = as_int(v, key);
  } else if (key == "upsample.tau_m") {
    cfg.upsample_registration.edge_threshold_tau = as_number(v, key);
    cfg.upsample_texture.edge_threshold_tau = as_number(v, key);
  } else if (key == "upsample.texture_rate") {
    cfg.upsample_texture.rate = as_int(v, key);
  } else if (key == "icp.variant") {
    cfg.icp.variant = parse_icp_variant(as_string(v));
  } else if (key == "icp.max_iter") {
    cfg.icp.max_iterations = as_int(v, key);
  } else if (key == "icp.max_corr_dist_m") {
    cfg.icp.correspondence_max_distance = as_number(v, key);
  } else if (key == "icp.eps_t_m") {
    cfg.icp.convergence_translation_eps = as_number(v, key);
  } else if (key == "icp.eps_r_rad") {
    cfg.icp.convergence_rotation_eps = as_number(v, key);
  } else if (key == "icp.gicp_epsilon") {
    cfg.icp.gicp_covariance_epsilon = as_number(v, key);
  } else if (key == "icp.normal_k") {
    cfg.icp.normal_estimation_k = as_int(v, key);
  } else if (key == "foveal.near_m") {
    cfg.foveal.near_blind_radius = as_number(v, key);
  } else if (key == "foveal.far_m") {
    cfg.foveal.white_zone_outer_radius = as_number(v, key);
  } else if (key == "foveal.h_half_angle_deg") {
    cfg.foveal.horizontal_slice_half_angle = deg2rad(as_number(v, key));
  } else if (key == "foveal.v_half_angle_deg") {
    cfg.foveal.vertical_slice_half_angle = deg2rad(as_number(v, key));
  } else if (key == "rayfilter.window_M") {
    cfg.rayfilter.window_size_M = as_int(v, key);
  } else if (key == "rayfilter.c") {
    cfg.rayfilter.outlier_rate_c = as_number(v, key);
  } else if (key == "pipeline.registration") {
    cfg.registration = parse_registration_mode(as_string(v));
  } else if (key == "pipeline.foveal") {
    cfg.foveal_enabled = as_bool(v, key);
  } else if (key == "pipeline.ray_filter") {
    cfg.ray_filter_enabled = as_bool(v, key);
  } else if (key == "experiment.label") {
    cfg.experiment_label = as_string(v);
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

/// "key=value" as given on a command line; the value is read as JSON when it parses, else as a string.
inline void apply_assignment(PipelineConfig &cfg, const std::string &assignment)
{
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw std::invalid_argument("config: expected key=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json v = nlohmann::json::parse(raw, nullptr, false);
  if (v.is_discarded()) v = raw;
  apply_setting(cfg, key, v);
}

inline void apply_json(PipelineConfig &cfg, const nlohmann::json &doc)
{
  if (!doc.is_object()) throw std::invalid_argument("config: top level must be an object of dotted keys");
  for (const auto &[key, value] : doc.items()) apply_setting(cfg, key, value);
}

inline PipelineConfig load_config(const std::filesystem::path &path, PipelineConfig base = {})
{
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception &e) {
    throw std::runtime_error("config: " + path.string() + ": " + e.what());
  }
  try {
    apply_json(base, doc);
  } catch (const std::invalid_argument &e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return base;
}

inline nlohmann::json to_json(const PipelineConfig &cfg)
{
  return {{"ground.z_threshold_m", cfg.ground_z_threshold},
          {"upsample.rate", cfg.upsample_registration.rate},
          {"upsample.tau_m", cfg.upsample_registration.edge_threshold_tau},
          {"upsample.texture_rate", cfg.upsample_texture.rate},
          {"icp.variant", std::string(to_string(cfg.icp.variant))},
          {"icp.max_iter", cfg.icp.max_iterations},
          {"icp.max_corr_dist_m", cfg.icp.correspondence_max_distance},
          {"icp.eps_t_m", cfg.icp.convergence_translation_eps},
          {"icp.eps_r_rad", cfg.icp.convergence_rotation_eps},
          {"icp.gicp_epsilon", cfg.icp.gicp_covariance_epsilon},
          {"icp.normal_k", cfg.icp.normal_estimation_k},
          {"foveal.near_m", cfg.foveal.near_blind_radius},
          {"foveal.far_m", cfg.foveal.white_zone_outer_radius},
          {"foveal.h_half_angle_deg", cfg.foveal.horizontal_slice_half_angle * 180.0 / std::numbers::pi},
          {"foveal.v_half_angle_deg", cfg.foveal.vertical_slice_half_angle * 180.0 / std::numbers::pi},
          {"rayfilter.window_M", cfg.rayfilter.window_size_M},
          {"rayfilter.c", cfg.rayfilter.outlier_rate_c},
          {"pipeline.registration", std::string(to_string(cfg.registration))},
          {"pipeline.foveal", cfg.foveal_enabled},
          {"pipeline.ray_filter", cfg.ray_filter_enabled},
          {"experiment.label", cfg.experiment_label}};
}

}  // namespace texmap
