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

// JSON description of a synthetic scene:
//
//   {
//     "surfaces": [
//       {"type": "rect", "origin": [x,y,z], "e1": [..], "e2": [..], "color": [r,g,b],
//        "checker_color": [r,g,b], "checker_size": 1.0},
//       {"type": "box", "min": [x,y,z], "max": [x,y,z], "color": [r,g,b]}
//     ],
//     "trajectory": [{"position": [x,y,z], "yaw_deg": 0.0}, ...],
//     "beams":  {"rings": 64, "min_elevation_deg": -24.8, "max_elevation_deg": 2.0,
//                "azimuth_step_deg": 0.2, "min_range": 0.5, "max_range": 120.0},
//     "camera": {"fx": 500, "fy": 500, "cx": 320, "cy": 120, "width": 640, "height": 240,
//                "position": [0.27, 0, -0.08], "background": [r,g,b]},
//     "pose_noise": {"translation": 0.0, "rotation": 0.0},
//     "seed": 1
//   }
//
// Every section except "surfaces" and "trajectory" is optional.

#include "texmap/foveal.hpp"
#include "texmap/synthetic.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

namespace texmap::synth
{

namespace detail
{

inline Eigen::Vector3d vec3(const nlohmann::json &j, const std::string &what)
{
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("scene: '" + what + "' must be a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline ColorRGB rgb(const nlohmann::json &j, const std::string &what)
{
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("scene: '" + what + "' must be [r, g, b]");
  ColorRGB c;
  std::uint8_t *ch[3] = {&c.r, &c.g, &c.b};
  for (int k = 0; k < 3; ++k) {
    const int v = j[std::size_t(k)].get<int>();
    if (v < 0 || v > 255) throw std::invalid_argument("scene: '" + what + "' channel outside [0, 255]");
    *ch[k] = std::uint8_t(v);
  }
  return c;
}

}  // namespace detail

inline Scene scene_from_json(const nlohmann::json &doc)
{
  using detail::rgb;
  using detail::vec3;
  Scene s;
  if (!doc.contains("surfaces") || !doc.contains("trajectory")) {
    throw std::invalid_argument("scene: 'surfaces' and 'trajectory' are required");
  }
  for (const auto &j : doc.at("surfaces")) {
    const std::string type = j.value("type", "rect");
    std::optional<ColorRGB> checker;
    if (j.contains("checker_color")) checker = rgb(j.at("checker_color"), "checker_color");
    const double checker_size = j.value("checker_size", 1.0);
    if (!(checker_size > 0.0)) throw std::invalid_argument("scene: checker_size must be > 0");
    if (type == "rect") {
      s.add_rect({vec3(j.at("origin"), "origin"), vec3(j.at("e1"), "e1"), vec3(j.at("e2"), "e2"),
                  rgb(j.at("color"), "color"), checker, checker_size});
    } else if (type == "box") {
      s.add_box(vec3(j.at("min"), "min"), vec3(j.at("max"), "max"), rgb(j.at("color"), "color"), checker,
                checker_size);
    } else {
      throw std::invalid_argument("scene: unknown surface type '" + type + "'");
    }
  }
  for (const auto &j : doc.at("trajectory")) {
    s.trajectory.push_back(RigidTransform::from_axis_angle(Eigen::Vector3d::UnitZ(), deg2rad(j.value("yaw_deg", 0.0)),
                                                           vec3(j.at("position"), "position")));
  }
  if (s.trajectory.empty()) throw std::invalid_argument("scene: empty trajectory");
  if (doc.contains("beams")) {
    const auto &b = doc.at("beams");
    s.beams.rings = b.value("rings", s.beams.rings);
    s.beams.min_elevation_deg = b.value("min_elevation_deg", s.beams.min_elevation_deg);
    s.beams.max_elevation_deg = b.value("max_elevation_deg", s.beams.max_elevation_deg);
    s.beams.azimuth_step_deg = b.value("azimuth_step_deg", s.beams.azimuth_step_deg);
    s.beams.min_range = b.value("min_range", s.beams.min_range);
    s.beams.max_range = b.value("max_range", s.beams.max_range);
  }
  if (doc.contains("camera")) {
    const auto &c = doc.at("camera");
    s.camera.fx = c.value("fx", s.camera.fx);
    s.camera.fy = c.value("fy", s.camera.fy);
    s.camera.cx = c.value("cx", s.camera.cx);
    s.camera.cy = c.value("cy", s.camera.cy);
    s.camera.width = c.value("width", s.camera.width);
    s.camera.height = c.value("height", s.camera.height);
    if (c.contains("position")) s.camera.position = vec3(c.at("position"), "camera.position");
    if (c.contains("background")) s.camera.background = rgb(c.at("background"), "camera.background");
  }
  if (doc.contains("pose_noise")) {
    s.pose_noise_translation = doc.at("pose_noise").value("translation", 0.0);
    s.pose_noise_rotation = doc.at("pose_noise").value("rotation", 0.0);
  }
  s.seed = doc.value("seed", 1u);
  s.camera.model();  // validates intrinsics and image size
  return s;
}

inline Scene load_scene(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in) throw std::runtime_error("scene: cannot open " + path.string());
  try {
    return scene_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception &e) {
    throw std::runtime_error("scene: " + path.string() + ": " + e.what());
  }
}

}  // namespace texmap::synth
