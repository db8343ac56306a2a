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


#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <numbers>

namespace texmap
{
namespace
{

namespace fs = std::filesystem;
using testing::TempDir;

void write_text(const fs::path &p, const std::string &s)
{
  fs::create_directories(p.parent_path());
  std::ofstream(p) << s;
}

void write_bin(const fs::path &p, const std::vector<float> &v)
{
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char *>(v.data()), std::streamsize(v.size() * sizeof(float)));
}

std::string oxts_line(double lat, double lon, double alt, double roll, double pitch, double yaw)
{
  std::ostringstream os;
  os.precision(17);
  os << lat << ' ' << lon << ' ' << alt << ' ' << roll << ' ' << pitch << ' ' << yaw;
  for (int i = 6; i < 30; ++i) os << " 0";
  os << '\n';
  return os.str();
}

// A three-frame drive in <root>/2011_09_26/2011_09_26_drive_0001_sync with
// calibration files in the date directory, as distributed.
struct MiniDrive
{
  TempDir tmp{"drive"};
  fs::path date = tmp.path / "2011_09_26";
  fs::path drive = date / "2011_09_26_drive_0001_sync";
  static constexpr double kLat = 49.0;
  static constexpr double kDlon = 1e-5;

  MiniDrive(bool with_imu = true)
  {
    write_text(date / "calib_cam_to_cam.txt",
               "calib_time: 09-Jan-2012 13:57:47\n"
               "corner_dist: 9.950000e-02\n"
               "R_rect_00: 0.9999239 0.00983776 -0.007445048 -0.009869795 0.9999421 -0.004278459 0.007402527 0.004351614 0.9999631\n"
               "P_rect_00: 30 0 20 0 0 30 15 0 0 0 1 0\n"
               "S_rect_02: 4.000000e+01 3.000000e+01\n"
               "P_rect_02: 30 0 20 1.35 0 30 15 0.06 0 0 1 0.0027\n"
               "S_rect_03: 4.000000e+01 3.000000e+01\n"
               "P_rect_03: 30 0 20 -11.4 0 30 15 0.03 0 0 1 0.0045\n");
    write_text(date / "calib_velo_to_cam.txt",
               "calib_time: 15-Mar-2012 11:37:16\n"
               "R: 7.533745e-03 -9.999714e-01 -6.166020e-04 1.480249e-02 7.280733e-04 -9.998902e-01 9.998621e-01 7.523790e-03 1.480755e-02\n"
               "T: -4.069766e-03 -7.631618e-02 -2.717806e-01\n");
    if (with_imu) {
      write_text(date / "calib_imu_to_velo.txt",
                 "calib_time: 25-May-2012 16:47:16\n"
                 "R: 9.999976e-01 7.553071e-04 -2.035826e-03 -7.854027e-04 9.998898e-01 -1.482298e-02 2.024406e-03 1.482454e-02 9.998881e-01\n"
                 "T: -8.086759e-01 3.195559e-01 -7.997231e-01\n");
    }
    for (int k = 0; k < 3; ++k) {
      char name[32];
      std::snprintf(name, sizeof name, "%010d", k);
      std::vector<float> scan;
      for (int i = 0; i < 5 + k; ++i) {
        const float pt[4] = {10.0f + float(i), 0.5f * float(i) - 1.0f, -0.2f, 0.1f * float(i)};
        scan.insert(scan.end(), pt, pt + 4);
      }
      write_bin(drive / "velodyne_points" / "data" / (std::string(name) + ".bin"), scan);
      fs::create_directories(drive / "image_02" / "data");
      write_png(drive / "image_02" / "data" / (std::string(name) + ".png"), RgbImage(40, 30, {std::uint8_t(k), 2, 3}));
      write_text(drive / "oxts" / "data" / (std::string(name) + ".txt"),
                 oxts_line(kLat, 8.0 + kDlon * k, 110.0, 0.0, 0.0, 0.0));
    }
    write_text(drive / "oxts" / "timestamps.txt",
               "2011-09-26 23:59:59.900000000\n2011-09-26 23:59:59.950000000\n2011-09-27 00:00:00.000000000\n");
  }
};

TEST(Kitti, LoadsFabricatedDrive)
{
  MiniDrive d;
  const auto frames = kitti::load_kitti_sequence(d.drive);
  ASSERT_EQ(frames.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_NO_THROW(frames[k].validate());
    EXPECT_EQ(frames[k].scan.size(), 5 + k);
    EXPECT_EQ(frames[k].frame_id, long(k));
    EXPECT_EQ(frames[k].image.at(0, 0).r, k);
  }
  EXPECT_LT((frames[0].raw_pose.matrix() - Eigen::Matrix4d::Identity()).norm(), 1e-15);
  EXPECT_NEAR(frames[1].timestamp, 0.05, 1e-9);
  EXPECT_NEAR(frames[2].timestamp, 0.10, 1e-9);  // crosses midnight
  EXPECT_FLOAT_EQ(frames[1].scan.intensity(3), 0.3f);
}

TEST(Kitti, PosesAreEastwardDisplacementInTheVelodyneFrame)
{
  MiniDrive d;
  const auto frames = kitti::load_kitti_sequence(d.drive);
  const double east = 6378137.0 * std::cos(MiniDrive::kLat * std::numbers::pi / 180.0) * MiniDrive::kDlon *
                      std::numbers::pi / 180.0;
  // IMU displacement (east, 0, 0) conjugated into the velodyne frame.
  const RigidTransform imu_to_velo = kitti::read_rigid(d.date / "calib_imu_to_velo.txt");
  for (int k = 1; k < 3; ++k) {
    const RigidTransform imu_motion(Eigen::Matrix3d::Identity(), {east * k, 0, 0});
    const RigidTransform expected = imu_to_velo * imu_motion * imu_to_velo.inverse();
    EXPECT_LT((frames[std::size_t(k)].raw_pose.matrix() - expected.matrix()).norm(), 1e-6);
  }
}

TEST(Kitti, MissingImuCalibrationMeansIdentity)
{
  MiniDrive d(false);
  const auto frames = kitti::load_kitti_sequence(d.drive);
  EXPECT_GT(frames[1].raw_pose.translation().x(), 0.7);
  EXPECT_LT(std::abs(frames[1].raw_pose.translation().y()), 1e-6);
}

TEST(Kitti, ProjectionMatchesCalibrationChain)
{
  MiniDrive d;
  const auto calib = kitti::read_calibration(d.drive, 2);
  EXPECT_EQ(calib.cam.width(), 40);
  EXPECT_EQ(calib.cam.height(), 30);
  // Reference chain: P_rect_02 * R_rect_00 * [R|T]_velo_to_cam.
  Eigen::Matrix<double, 3, 4> P;
  P << 30, 0, 20, 1.35, 0, 30, 15, 0.06, 0, 0, 1, 0.0027;
  Eigen::Matrix4d R0 = Eigen::Matrix4d::Identity();
  R0.topLeftCorner<3, 3>() << 0.9999239, 0.00983776, -0.007445048, -0.009869795, 0.9999421, -0.004278459, 0.007402527,
      0.004351614, 0.9999631;
  const Eigen::Matrix4d Tr = kitti::read_rigid(d.date / "calib_velo_to_cam.txt").matrix();
  std::mt19937 rng(36);
  std::uniform_real_distribution<double> fwd(5, 40), lat(-8, 8), up(-1.5, 1.5);
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    const Point3 x(fwd(rng), lat(rng), up(rng));
    const Eigen::Vector3d y = P * R0 * Tr * Eigen::Vector4d(x.x(), x.y(), x.z(), 1.0);
    const double u = y.x() / y.z(), v = y.y() / y.z();
    const auto uv = calib.cam.project_continuous(x);
    if (!(u >= 0 && u < 40 && v >= 0 && v < 30)) {
      EXPECT_FALSE(uv);
      continue;
    }
    ASSERT_TRUE(uv);
    EXPECT_NEAR(uv->x(), u, 1e-5);
    EXPECT_NEAR(uv->y(), v, 1e-5);
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(Kitti, SubsetAndCameraSelection)
{
  MiniDrive d;
  const auto frames = kitti::load_kitti_sequence(d.drive, {1, 1, 2});
  ASSERT_EQ(frames.size(), 1u);
  EXPECT_EQ(frames[0].frame_id, 1);
  EXPECT_LT((frames[0].raw_pose.matrix() - Eigen::Matrix4d::Identity()).norm(), 1e-15);
  EXPECT_THROW(kitti::load_kitti_sequence(d.drive, {5, 1, 2}), std::out_of_range);
  EXPECT_THROW(kitti::load_kitti_sequence(d.drive, {0, 0, 3}), std::runtime_error);  // no image_03
}

TEST(Kitti, ScanSizeIsSixteenBytesPerPoint)
{
  TempDir tmp("bin");
  write_bin(tmp.path / "a.bin", std::vector<float>(4 * 7, 0.5f));
  EXPECT_EQ(kitti::read_velodyne_bin(tmp.path / "a.bin").size(), 7u);
  write_bin(tmp.path / "b.bin", std::vector<float>(4 * 7 + 1, 0.5f));
  EXPECT_THROW(kitti::read_velodyne_bin(tmp.path / "b.bin"), std::runtime_error);
  EXPECT_THROW(kitti::read_velodyne_bin(tmp.path / "missing.bin"), std::runtime_error);
}

TEST(Kitti, ErrorPaths)
{
  {
    MiniDrive d;
    fs::remove(d.drive / "oxts" / "data" / "0000000002.txt");
    EXPECT_THROW(kitti::load_kitti_sequence(d.drive), std::runtime_error);
  }
  {
    MiniDrive d;
    write_text(d.drive / "oxts" / "data" / "0000000001.txt", "1 2 3\n");
    EXPECT_THROW(kitti::load_kitti_sequence(d.drive), std::runtime_error);
  }
  {
    MiniDrive d;
    write_png(d.drive / "image_02" / "data" / "0000000001.png", RgbImage(10, 10, {}));
    EXPECT_THROW(kitti::load_kitti_sequence(d.drive), std::runtime_error);
  }
  {
    MiniDrive d;
    fs::remove(d.date / "calib_velo_to_cam.txt");
    EXPECT_THROW(kitti::load_kitti_sequence(d.drive), std::runtime_error);
  }
  {
    MiniDrive d;
    write_text(d.date / "calib_cam_to_cam.txt", "P_rect_02: 1 2 3\nR_rect_00: 1 0 0 0 1 0 0 0 1\nS_rect_02: 40 30\n");
    EXPECT_THROW(kitti::load_kitti_sequence(d.drive), std::runtime_error);
  }
  EXPECT_THROW(kitti::load_kitti_sequence("/nonexistent/drive"), std::runtime_error);
}

TEST(Image, PngRoundTrip)
{
  TempDir tmp("png");
  std::mt19937 rng(37);
  RgbImage img(17, 9, {});
  for (int v = 0; v < 9; ++v)
    for (int u = 0; u < 17; ++u) img.set(u, v, testing::random_color(rng));
  write_png(tmp.path / "x.png", img);
  EXPECT_EQ(read_png(tmp.path / "x.png"), img);
  write_text(tmp.path / "bad.png", "not a png");
  EXPECT_THROW(read_png(tmp.path / "bad.png"), std::runtime_error);
}

TEST(Ply, OneRedPoint)
{
  TempDir tmp("ply");
  TexturedMap map;
  map.append({1, 2, 3}, {255, 0, 0}, 0);
  export_map(map, tmp.path / "m.ply", CloudFormat::Ply);
  std::ifstream in(tmp.path / "m.ply", std::ios::binary);
  std::string header((std::istreambuf_iterator<char>(in)), {});
  EXPECT_NE(header.find("element vertex 1\n"), std::string::npos);
  const PointCloud back = read_ply(tmp.path / "m.ply");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back.color(0), (ColorRGB{255, 0, 0}));
  EXPECT_EQ(back.point(0), Point3(1, 2, 3));
}

TEST(Ply, EmptyMapIsAnError)
{
  TempDir tmp("ply");
  EXPECT_THROW(export_map(TexturedMap{}, tmp.path / "m.ply", CloudFormat::Ply), std::invalid_argument);
}

TEST(Ply, RoundTripIsBitExactInFloat32)
{
  TempDir tmp("ply");
  std::mt19937 rng(38);
  PointCloud c(Frame::Local, false, true);
  for (int i = 0; i < 10000; ++i) c.push_back(testing::uniform_point(rng, -500, 500), 0.0f, testing::random_color(rng));
  write_ply(tmp.path / "a.ply", c);
  const PointCloud a = read_ply(tmp.path / "a.ply");
  ASSERT_EQ(a.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      const float want = float(c.point(i)[k]), got = float(a.point(i)[k]);
      ASSERT_EQ(std::memcmp(&want, &got, sizeof(float)), 0);
      ASSERT_EQ(a.point(i)[k], double(want));
    }
    ASSERT_EQ(a.color(i), c.color(i));
  }
  write_ply(tmp.path / "b.ply", a);
  std::ifstream fa(tmp.path / "a.ply", std::ios::binary), fb(tmp.path / "b.ply", std::ios::binary);
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(fa), {}), std::string(std::istreambuf_iterator<char>(fb), {}));
}

TEST(Ply, XyzRgbRoundTripIsExact)
{
  TempDir tmp("xyz");
  std::mt19937 rng(39);
  PointCloud c(Frame::Local, false, true);
  // Coordinates are stored as float32, so start from float-valued coordinates.
  std::uniform_real_distribution<float> u(-500.0f, 500.0f);
  for (int i = 0; i < 1000; ++i) {
    const float x = u(rng), y = u(rng), z = u(rng);
    c.push_back(Point3(x, y, z), 0.0f, testing::random_color(rng));
  }
  write_cloud(tmp.path / "a.xyzrgb", c, format_from_path(tmp.path / "a.xyzrgb"));
  const PointCloud a = read_cloud(tmp.path / "a.xyzrgb", CloudFormat::XyzRgb);
  ASSERT_EQ(a.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    ASSERT_EQ(a.point(i), c.point(i));
    ASSERT_EQ(a.color(i), c.color(i));
  }
  EXPECT_THROW(format_from_path("map.obj"), std::invalid_argument);
}

TEST(Ply, ReadsAsciiWithForeignProperties)
{
  TempDir tmp("ply");
  write_text(tmp.path / "a.ply",
             "ply\nformat ascii 1.0\ncomment made elsewhere\nelement vertex 2\n"
             "property double x\nproperty double y\nproperty double z\nproperty float nx\n"
             "property uchar red\nproperty uchar green\nproperty uchar blue\n"
             "element face 0\nproperty list uchar int vertex_indices\nend_header\n"
             "1.5 2 3 0.1 10 20 30\n-4 5 6.25 0.2 255 0 1\n");
  const PointCloud a = read_ply(tmp.path / "a.ply");
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a.point(1), Point3(-4, 5, 6.25));
  EXPECT_EQ(a.color(0), (ColorRGB{10, 20, 30}));
  write_text(tmp.path / "b.ply", "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nend_header\n1\n");
  EXPECT_THROW(read_ply(tmp.path / "b.ply"), std::runtime_error);
}

// Möller-Trumbore over the two triangles of each parallelogram.
std::optional<std::pair<double, ColorRGB>> oracle_cast(const synth::Scene &scene, const Point3 &o,
                                                       const Eigen::Vector3d &d)
{
  std::optional<std::pair<double, ColorRGB>> best;
  for (const auto &r : scene.surfaces) {
    const Point3 corners[2][3] = {{r.origin, r.origin + r.e1, r.origin + r.e2},
                                  {r.origin + r.e1 + r.e2, r.origin + r.e2, r.origin + r.e1}};
    for (const auto &tri : corners) {
      const Eigen::Vector3d a = tri[1] - tri[0], b = tri[2] - tri[0];
      const Eigen::Vector3d p = d.cross(b);
      const double det = a.dot(p);
      if (std::abs(det) < 1e-14) continue;
      const Eigen::Vector3d s = o - tri[0];
      const double bu = s.dot(p) / det;
      const Eigen::Vector3d q = s.cross(a);
      const double bv = d.dot(q) / det, t = b.dot(q) / det;
      if (bu < 0 || bv < 0 || bu + bv > 1 || t <= 1e-9) continue;
      if (best && t >= best->first) continue;
      const Eigen::Vector3d rel = o + t * d - r.origin;
      best = {t, r.color_at(rel.dot(r.e1) / r.e1.squaredNorm(), rel.dot(r.e2) / r.e2.squaredNorm())};
    }
  }
  return best;
}

TEST(Synthetic, PlaneFacingTheSensor)
{
  synth::Scene scene;
  scene.add_rect({{8, -20, -10}, {0, 40, 0}, {0, 0, 20}, {10, 20, 30}, std::nullopt, 1.0});
  scene.trajectory = {RigidTransform::identity()};
  const auto f = synth::render_synthetic_frame(scene, 0);
  ASSERT_GT(f.bundle.scan.size(), 1000u);
  for (const auto &p : f.bundle.scan.points()) EXPECT_NEAR(p.x(), 8.0, 1e-12);
}

TEST(Synthetic, BoxHidesTheWallBehindIt)
{
  synth::Scene scene;
  scene.add_rect({{12, -10, -2}, {0, 20, 0}, {0, 0, 6}, {10, 20, 30}, std::nullopt, 1.0});
  scene.add_box({6, -0.5, -1}, {7, 0.5, 0.4}, {200, 0, 0});
  scene.camera.position = {0.0, 0.8, 0.0};
  scene.trajectory = {RigidTransform::identity()};
  const auto f = synth::render_synthetic_frame(scene, 0);
  const Point3 eye = f.bundle.cam.origin();
  std::size_t hidden = 0;
  for (std::size_t i = 0; i < f.bundle.scan.size(); ++i) {
    if (f.truth.surface[i] != 0 || !f.bundle.cam.project_continuous(f.bundle.scan.point(i))) continue;
    // Sight line from the camera to the wall point, against the box's x-range.
    const Point3 p = f.truth.local_position[i];
    const auto hit = oracle_cast(scene, eye, p - eye);
    ASSERT_TRUE(hit);
    const bool blocked = hit->first < 1.0 - 1e-9;
    EXPECT_EQ(f.truth.camera_visible[i], !blocked);
    hidden += blocked;
  }
  EXPECT_GT(hidden, 50u);
}

TEST(Synthetic, RenderedPixelsMatchIndependentRayCast)
{
  const synth::Scene scene = synth::corridor_scene(3);
  const RigidTransform pose = scene.trajectory[2];
  const RgbImage img = synth::render_image(scene, pose);
  const CameraModel cam = scene.camera.model();
  const RigidTransform cam_to_local = pose * cam.extrinsics().inverse();
  std::size_t covered = 0;
  for (int v = 0; v < cam.height(); v += 3) {
    for (int u = 0; u < cam.width(); u += 3) {
      const Eigen::Vector3d dir = cam_to_local.rotation() * (cam.intrinsics().inverse() * Eigen::Vector3d(u + 0.5, v + 0.5, 1));
      const auto hit = oracle_cast(scene, cam_to_local.translation(), dir);
      if (!hit) {
        EXPECT_EQ(img.at(u, v), scene.camera.background);
        continue;
      }
      ++covered;
      EXPECT_EQ(img.at(u, v), hit->second) << u << "," << v;
    }
  }
  EXPECT_GT(covered, 5000u);
}

TEST(Synthetic, PoseNoiseIsDeterministicAndSparesFrameZero)
{
  synth::Scene scene = synth::corridor_scene(3);
  scene.pose_noise_translation = 0.1;
  scene.pose_noise_rotation = 0.01;
  const auto a = synth::render_synthetic_frame(scene, 1), b = synth::render_synthetic_frame(scene, 1);
  EXPECT_EQ(a.bundle.raw_pose.matrix(), b.bundle.raw_pose.matrix());
  EXPECT_GT((a.bundle.raw_pose.translation() - a.true_pose.translation()).norm(), 1e-4);
  const auto z = synth::render_synthetic_frame(scene, 0);
  EXPECT_EQ(z.bundle.raw_pose.matrix(), z.true_pose.matrix());
}

TEST(Synthetic, SceneErrorOfExactPointsIsZero)
{
  const synth::Scene scene = synth::corridor_scene(1);
  const auto f = synth::render_synthetic_frame(scene, 0);
  PointCloud pts(Frame::Local, false, true);
  for (std::size_t i = 0; i < f.truth.local_position.size(); i += 10) pts.push_back(f.truth.local_position[i], 0.0f, f.truth.color[i]);
  const auto e = synth::scene_error(scene, pts);
  EXPECT_LT(e.mean_distance, 1e-9);
  EXPECT_EQ(e.mean_color_distance, 0.0);
}

TEST(SceneJson, ParsesAndValidates)
{
  const auto s = synth::scene_from_json(nlohmann::json::parse(R"({
    "surfaces": [{"type": "rect", "origin": [10, -5, -2], "e1": [0, 10, 0], "e2": [0, 0, 4], "color": [1, 2, 3],
                  "checker_color": [4, 5, 6], "checker_size": 0.5},
                 {"type": "box", "min": [5, -1, -2], "max": [6, 1, 0], "color": [9, 9, 9]}],
    "trajectory": [{"position": [0, 0, 0]}, {"position": [0.5, 0, 0], "yaw_deg": 90}],
    "beams": {"rings": 16},
    "camera": {"width": 320, "cx": 160},
    "seed": 4
  })"));
  EXPECT_EQ(s.surfaces.size(), 7u);
  EXPECT_EQ(s.trajectory.size(), 2u);
  EXPECT_NEAR(s.trajectory[1].angle(), std::numbers::pi / 2, 1e-12);
  EXPECT_EQ(s.beams.rings, 16);
  EXPECT_EQ(s.camera.width, 320);
  EXPECT_EQ(s.seed, 4u);
  EXPECT_THROW(synth::scene_from_json(nlohmann::json::parse(R"({"surfaces": []})")), std::invalid_argument);
  EXPECT_THROW(synth::scene_from_json(nlohmann::json::parse(
                   R"({"surfaces": [{"type": "cone"}], "trajectory": [{"position": [0,0,0]}]})")),
               std::invalid_argument);
}

}  // namespace
}  // namespace texmap
