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

// Reader for the KITTI raw ("synced + rectified") drive layout:
//
//   <drive>/velodyne_points/data/NNNNNNNNNN.bin   float32 x y z reflectance
//   <drive>/image_0X/data/NNNNNNNNNN.png
//   <drive>/oxts/data/NNNNNNNNNN.txt              30 whitespace-separated fields
//   <drive>/oxts/timestamps.txt                   optional
//   calib_cam_to_cam.txt, calib_velo_to_cam.txt, calib_imu_to_velo.txt
//
// Calibration files are looked up in the drive directory first and then in
// its parent (the date directory of the official archives).

#include "texmap/frame.hpp"
#include "texmap/geometry.hpp"
#include "texmap/image.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace texmap::kitti
{

namespace fs = std::filesystem;

struct OxtsRecord
{
  double lat{0.0}, lon{0.0}, alt{0.0};     // degrees, degrees, meters
  double roll{0.0}, pitch{0.0}, yaw{0.0};  // radians
};

struct Calibration
{
  CameraModel cam;              // velodyne -> rectified camera
  RigidTransform imu_to_velo;   // identity when the file is absent
};

struct LoadOptions
{
  std::size_t first{0};
  std::size_t count{0};  // 0 = through the end of the drive
  int camera{2};         // 2 = left color, 3 = right color
};

using CalibrationFile = std::map<std::string, std::vector<double>>;

inline CalibrationFile read_calibration_file(const fs::path &path)
{
  std::ifstream in(path);
  if (!in) throw std::runtime_error("kitti: cannot open " + path.string());
  CalibrationFile out;
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::istringstream values(line.substr(colon + 1));
    std::vector<double> v;
    double x;
    while (values >> x) v.push_back(x);
    out[line.substr(0, colon)] = std::move(v);
  }
  return out;
}

inline const std::vector<double> &calibration_entry(const CalibrationFile &f, const std::string &key,
                                                    std::size_t n, const fs::path &path)
{
  const auto it = f.find(key);
  if (it == f.end()) throw std::runtime_error("kitti: " + path.string() + ": missing entry '" + key + "'");
  if (it->second.size() != n) {
    throw std::runtime_error("kitti: " + path.string() + ": entry '" + key + "' has " +
                             std::to_string(it->second.size()) + " values, expected " + std::to_string(n));
  }
  return it->second;
}

/// Drive directory first, then its parent.
inline std::optional<fs::path> find_calibration(const fs::path &drive, const std::string &name)
{
  for (const auto &dir : {drive, drive.parent_path()}) {
    const fs::path p = dir / name;
    if (fs::exists(p)) return p;
  }
  return std::nullopt;
}

inline RigidTransform read_rigid(const fs::path &path)
{
  const auto f = read_calibration_file(path);
  const auto &r = calibration_entry(f, "R", 9, path);
  const auto &t = calibration_entry(f, "T", 3, path);
  Eigen::Matrix3d R;
  R << r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8];
  // Published calibrations are orthonormal only to ~1e-7; project onto SO(3).
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  R = svd.matrixU() * svd.matrixV().transpose();
  return {R, Eigen::Vector3d(t[0], t[1], t[2])};
}

inline Calibration read_calibration(const fs::path &drive, int camera = 2)
{
  const auto cam_path = find_calibration(drive, "calib_cam_to_cam.txt");
  const auto velo_path = find_calibration(drive, "calib_velo_to_cam.txt");
  if (!cam_path) throw std::runtime_error("kitti: missing calib_cam_to_cam.txt near " + drive.string());
  if (!velo_path) throw std::runtime_error("kitti: missing calib_velo_to_cam.txt near " + drive.string());

  const auto cc = read_calibration_file(*cam_path);
  const std::string id = (camera < 10 ? "0" : "") + std::to_string(camera);
  const auto &p = calibration_entry(cc, "P_rect_" + id, 12, *cam_path);
  const auto &r0 = calibration_entry(cc, "R_rect_00", 9, *cam_path);
  const auto &size = calibration_entry(cc, "S_rect_" + id, 2, *cam_path);

  Eigen::Matrix<double, 3, 4> P;
  P << p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], p[8], p[9], p[10], p[11];
  Eigen::Matrix3d K = P.leftCols<3>();
  K(1, 0) = K(2, 0) = K(2, 1) = 0.0;
  K(2, 2) = 1.0;
  // P = K [I | t]: the rectified camera sits at a baseline offset from camera 0.
  const Eigen::Vector3d baseline = K.inverse() * P.col(3);

  Eigen::Matrix3d R0;
  R0 << r0[0], r0[1], r0[2], r0[3], r0[4], r0[5], r0[6], r0[7], r0[8];
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(R0, Eigen::ComputeFullU | Eigen::ComputeFullV);
  R0 = svd.matrixU() * svd.matrixV().transpose();

  const RigidTransform velo_to_cam0 = read_rigid(*velo_path);
  const RigidTransform extrinsics =
      RigidTransform(Eigen::Matrix3d::Identity(), baseline) * RigidTransform(R0, Eigen::Vector3d::Zero()) * velo_to_cam0;

  RigidTransform imu_to_velo;
  if (const auto imu_path = find_calibration(drive, "calib_imu_to_velo.txt")) imu_to_velo = read_rigid(*imu_path);

  return {CameraModel(K, RigidTransform(extrinsics.rotation(), extrinsics.translation()), int(std::lround(size[0])),
                      int(std::lround(size[1]))),
          imu_to_velo};
}

/// Decodes a velodyne .bin file; reflectance is clamped into [0, 1].
inline PointCloud read_velodyne_bin(const fs::path &path)
{
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("kitti: cannot open " + path.string());
  const auto bytes = std::size_t(in.tellg());
  if (bytes % 16 != 0) {
    throw std::runtime_error("kitti: " + path.string() + ": truncated scan (" + std::to_string(bytes) +
                             " bytes is not a multiple of 16)");
  }
  in.seekg(0);
  std::vector<float> raw(bytes / 4);
  if (!in.read(reinterpret_cast<char *>(raw.data()), std::streamsize(bytes))) {
    throw std::runtime_error("kitti: " + path.string() + ": read failed");
  }
  PointCloud cloud(Frame::Vehicle, true, false);
  cloud.reserve(raw.size() / 4);
  for (std::size_t i = 0; i + 3 < raw.size(); i += 4) {
    const Point3 p(raw[i], raw[i + 1], raw[i + 2]);
    if (!p.allFinite()) continue;
    cloud.push_back(p, std::clamp(raw[i + 3], 0.0f, 1.0f));
  }
  return cloud;
}

inline OxtsRecord read_oxts(const fs::path &path)
{
  std::ifstream in(path);
  if (!in) throw std::runtime_error("kitti: cannot open " + path.string());
  std::vector<double> v;
  double x;
  while (in >> x) v.push_back(x);
  if (v.size() < 30) {
    throw std::runtime_error("kitti: " + path.string() + ": expected 30 fields, found " + std::to_string(v.size()));
  }
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

/// IMU pose in a Mercator-projected metric frame; `scale` = cos(lat0).
inline RigidTransform oxts_pose(const OxtsRecord &o, double scale)
{
  constexpr double er = 6378137.0;
  constexpr double pi = std::numbers::pi;
  const double tx = scale * o.lon * pi * er / 180.0;
  const double ty = scale * er * std::log(std::tan((90.0 + o.lat) * pi / 360.0));
  const Eigen::Matrix3d R = (Eigen::AngleAxisd(o.yaw, Eigen::Vector3d::UnitZ()) *
                             Eigen::AngleAxisd(o.pitch, Eigen::Vector3d::UnitY()) *
                             Eigen::AngleAxisd(o.roll, Eigen::Vector3d::UnitX()))
                                .toRotationMatrix();
  return {R, Eigen::Vector3d(tx, ty, o.alt)};
}

/// Velodyne-frame poses relative to the first record (which maps to identity).
inline std::vector<RigidTransform> velodyne_poses(const std::vector<OxtsRecord> &records,
                                                  const RigidTransform &imu_to_velo)
{
  std::vector<RigidTransform> out;
  if (records.empty()) return out;
  const double scale = std::cos(records.front().lat * std::numbers::pi / 180.0);
  const RigidTransform velo_to_imu = imu_to_velo.inverse();
  const RigidTransform origin_inv = oxts_pose(records.front(), scale).inverse();
  for (const auto &r : records) {
    const RigidTransform rel = origin_inv * oxts_pose(r, scale);
    const RigidTransform T = imu_to_velo * rel * velo_to_imu;
    out.emplace_back(T.rotation(), T.translation());
  }
  out.front() = RigidTransform::identity();
  return out;
}

/// Sorted regular files with `ext` in `dir`.
inline std::vector<fs::path> list_files(const fs::path &dir, const std::string &ext)
{
  if (!fs::is_directory(dir)) throw std::runtime_error("kitti: missing directory " + dir.string());
  std::vector<fs::path> out;
  for (const auto &e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Seconds since the first line of a KITTI timestamps file ("YYYY-MM-DD hh:mm:ss.fffffffff").
inline std::vector<double> read_timestamps(const fs::path &path)
{
  std::ifstream in(path);
  if (!in) throw std::runtime_error("kitti: cannot open " + path.string());
  std::vector<double> out;
  std::string line;
  double first = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto space = line.find(' ');
    int h = 0, m = 0;
    double s = 0.0;
    if (space == std::string::npos || std::sscanf(line.c_str() + space + 1, "%d:%d:%lf", &h, &m, &s) != 3) {
      throw std::runtime_error("kitti: " + path.string() + ": malformed timestamp '" + line + "'");
    }
    double t = h * 3600.0 + m * 60.0 + s;
    if (out.empty()) first = t;
    t -= first;
    if (t < 0.0) t += 86400.0;  // crossed midnight
    out.push_back(t);
  }
  return out;
}

/// Loads `opts.count` frames starting at `opts.first` (all remaining when count is 0).
inline std::vector<FrameBundle> load_kitti_sequence(const fs::path &drive, const LoadOptions &opts = {})
{
  const std::string cam_dir = "image_0" + std::to_string(opts.camera);
  const auto scans = list_files(drive / "velodyne_points" / "data", ".bin");
  const auto images = list_files(drive / cam_dir / "data", ".png");
  const auto oxts = list_files(drive / "oxts" / "data", ".txt");
  if (scans.size() != images.size() || scans.size() != oxts.size()) {
    throw std::runtime_error("kitti: frame count mismatch in " + drive.string() + ": " + std::to_string(scans.size()) +
                             " scans, " + std::to_string(images.size()) + " images, " + std::to_string(oxts.size()) +
                             " oxts records");
  }
  if (opts.first >= scans.size() && !scans.empty()) {
    throw std::out_of_range("kitti: first frame " + std::to_string(opts.first) + " beyond " +
                            std::to_string(scans.size()) + " frames");
  }
  const std::size_t end = opts.count == 0 ? scans.size() : std::min(scans.size(), opts.first + opts.count);

  const Calibration calib = read_calibration(drive, opts.camera);
  std::vector<OxtsRecord> records;
  for (std::size_t k = opts.first; k < end; ++k) records.push_back(read_oxts(oxts[k]));
  const auto poses = velodyne_poses(records, calib.imu_to_velo);

  std::vector<double> stamps;
  if (fs::exists(drive / "oxts" / "timestamps.txt")) stamps = read_timestamps(drive / "oxts" / "timestamps.txt");

  std::vector<FrameBundle> out;
  out.reserve(end - opts.first);
  for (std::size_t k = opts.first; k < end; ++k) {
    FrameBundle f{read_velodyne_bin(scans[k]), read_png(images[k]), poses[k - opts.first], calib.cam,
                  k < stamps.size() ? stamps[k] - (opts.first < stamps.size() ? stamps[opts.first] : 0.0)
                                    : double(k - opts.first) * 0.1,
                  long(k)};
    if (f.image.width() != f.cam.width() || f.image.height() != f.cam.height()) {
      throw std::runtime_error("kitti: " + images[k].string() + ": image size " + std::to_string(f.image.width()) +
                               "x" + std::to_string(f.image.height()) + " disagrees with the calibration");
    }
    if (f.scan.empty()) throw std::runtime_error("kitti: " + scans[k].string() + ": empty scan");
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace texmap::kitti
