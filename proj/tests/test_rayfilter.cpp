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

#include <map>
#include <tuple>

namespace texmap
{
namespace
{

CameraModel small_camera() { return CameraModel::from_pinhole(100, 100, 10, 10, 20, 20); }

// Point at distance d through the center of pixel (u, v) of small_camera().
Point3 through_pixel(int u, int v, double d)
{
  return Eigen::Vector3d((u + 0.5 - 10.0) / 100.0, (v + 0.5 - 10.0) / 100.0, 1.0).normalized() * d;
}

PointCloud cloud_of(std::initializer_list<Point3> pts)
{
  PointCloud c(Frame::Vehicle);
  for (const auto &p : pts) c.push_back(p);
  return c;
}

TEST(RayBuffer, SingleScanPoint)
{
  const auto buf = build_ray_buffer(cloud_of({through_pixel(3, 4, 5.0)}), PointCloud(Frame::Vehicle), small_camera());
  EXPECT_EQ(buf.occupied_pixels(), 1u);
  const RayEntry &w = buf.winner({3, 4});
  EXPECT_EQ(w.origin, RayOrigin::ScanPoint);
  EXPECT_EQ(w.index, 0u);
  EXPECT_NEAR(w.d, 5.0, 1e-12);
}

TEST(RayBuffer, NearerMapPointWins)
{
  const auto buf = build_ray_buffer(cloud_of({through_pixel(3, 4, 5.0)}), cloud_of({through_pixel(3, 4, 4.0)}),
                                    small_camera());
  EXPECT_EQ(buf.winner({3, 4}).origin, RayOrigin::MapPoint);
  EXPECT_EQ(buf.map_rays({3, 4}), 1u);
}

TEST(RayBuffer, TieGoesToMapPoint)
{
  const auto buf = build_ray_buffer(cloud_of({through_pixel(3, 4, 5.0)}), cloud_of({through_pixel(3, 4, 5.0)}),
                                    small_camera());
  EXPECT_EQ(buf.winner({3, 4}).origin, RayOrigin::MapPoint);
}

TEST(RayBuffer, MatchesGroupByPixelOracle)
{
  std::mt19937 rng(26);
  const CameraModel cam = CameraModel::from_pinhole(60, 60, 32, 24, 64, 48);
  std::uniform_real_distribution<double> u(-0.6, 0.6), depth(1.0, 30.0);
  PointCloud scan(Frame::Vehicle), map(Frame::Vehicle);
  for (int i = 0; i < 5000; ++i) {
    const Point3 p = Eigen::Vector3d(u(rng), u(rng), 1.0).normalized() * depth(rng);
    (i % 3 == 0 ? map : scan).push_back(i % 7 == 0 ? Point3(-p) : p);
  }
  const auto buf = build_ray_buffer(scan, map, cam);

  using Key = std::pair<int, int>;
  std::map<Key, std::tuple<double, int, std::size_t>> best;  // (d, origin rank, index); map ranks first
  std::map<Key, unsigned> map_count;
  const auto offer = [&](const Point3 &p, int rank, std::size_t i) {
    const Point3 pc = p;
    if (pc.z() <= 0) return;
    const double uu = 60 * pc.x() / pc.z() + 32, vv = 60 * pc.y() / pc.z() + 24;
    if (uu < 0 || uu >= 64 || vv < 0 || vv >= 48) return;
    const Key k{int(std::floor(uu)), int(std::floor(vv))};
    if (rank == 0) ++map_count[k];
    const auto cand = std::make_tuple(pc.norm(), rank, i);
    const auto it = best.find(k);
    if (it == best.end() || cand < it->second) best[k] = cand;
  };
  for (std::size_t i = 0; i < map.size(); ++i) offer(map.point(i), 0, i);
  for (std::size_t i = 0; i < scan.size(); ++i) offer(scan.point(i), 1, i);

  EXPECT_EQ(buf.occupied_pixels(), best.size());
  for (const auto &[k, b] : best) {
    const RayEntry &w = buf.winner({k.first, k.second});
    EXPECT_EQ(w.d, std::get<0>(b));
    EXPECT_EQ(int(w.origin == RayOrigin::ScanPoint), std::get<1>(b));
    EXPECT_EQ(w.index, std::get<2>(b));
    EXPECT_EQ(buf.map_rays({k.first, k.second}), map_count[k]);
  }
}

TEST(Occluding, LoneScanPointIsNotOccluding)
{
  const auto buf = build_ray_buffer(cloud_of({through_pixel(3, 4, 5.0)}), PointCloud(Frame::Vehicle), small_camera());
  EXPECT_FALSE(occluding_test(buf, 0));
}

TEST(Occluding, ScanPointInFrontOfMapPoint)
{
  const auto buf = build_ray_buffer(cloud_of({through_pixel(3, 4, 3.0)}), cloud_of({through_pixel(3, 4, 6.0)}),
                                    small_camera());
  EXPECT_TRUE(occluding_test(buf, 0));
  EXPECT_EQ(classify(buf, 0, {}), VisibilityVerdict::Occluding);
}

TEST(Occluding, MatchesRuleOnRandomConflicts)
{
  std::mt19937 rng(27);
  std::uniform_int_distribution<int> px(0, 4);
  std::uniform_real_distribution<double> d(2.0, 8.0);
  for (int trial = 0; trial < 200; ++trial) {
    PointCloud scan(Frame::Vehicle), map(Frame::Vehicle);
    std::vector<std::pair<int, int>> scan_px, map_px;
    for (int i = 0; i < 6; ++i) {
      scan_px.emplace_back(px(rng), px(rng));
      scan.push_back(through_pixel(scan_px.back().first, scan_px.back().second, d(rng)));
      map_px.emplace_back(px(rng), px(rng));
      map.push_back(through_pixel(map_px.back().first, map_px.back().second, d(rng)));
    }
    const auto buf = build_ray_buffer(scan, map, small_camera());
    for (std::size_t i = 0; i < scan.size(); ++i) {
      bool map_present = false, beaten = false;
      const double di = scan.point(i).norm();
      for (std::size_t j = 0; j < map.size(); ++j) {
        if (map_px[j] != scan_px[i]) continue;
        map_present = true;
        beaten |= map.point(j).norm() <= di + kRayTieTolerance;
      }
      for (std::size_t j = 0; j < scan.size(); ++j) {
        if (j == i || scan_px[j] != scan_px[i]) continue;
        const double dj = scan.point(j).norm();
        beaten |= dj < di - kRayTieTolerance || (std::abs(dj - di) <= kRayTieTolerance && j < i);
      }
      EXPECT_EQ(occluding_test(buf, i), map_present && !beaten);
    }
  }
}

TEST(Occluded, DegenerateWindowIsVisible)
{
  const auto buf = build_ray_buffer(cloud_of({through_pixel(10, 10, 9.0)}), PointCloud(Frame::Vehicle), small_camera());
  EXPECT_FALSE(occluded_test(buf, 0, {}));
  EXPECT_EQ(classify(buf, 0, {}), VisibilityVerdict::Visible);
}

TEST(Occluded, HandEvaluatedWindow)
{
  // Eight neighbours at 4 m and the candidate at 9 m: mu = 41/9, and
  // |9 - mu| / sigma = sqrt(8) ~ 2.83 over the nine values.
  PointCloud scan(Frame::Vehicle);
  scan.push_back(through_pixel(10, 10, 9.0));
  for (int dv = -1; dv <= 1; ++dv)
    for (int du = -1; du <= 1; ++du)
      if (du || dv) scan.push_back(through_pixel(10 + 2 * du, 10 + 2 * dv, 4.0));
  const auto buf = build_ray_buffer(scan, PointCloud(Frame::Vehicle), small_camera());
  EXPECT_TRUE(occluded_test(buf, 0, {5, 1.0}));
  EXPECT_TRUE(occluded_test(buf, 0, {5, 2.8}));
  EXPECT_FALSE(occluded_test(buf, 0, {5, 2.9}));
  EXPECT_FALSE(occluded_test(buf, 0, {3, 1.0}));  // neighbours two pixels away fall outside a 3x3 window
  EXPECT_EQ(classify(buf, 0, {5, 1.0}), VisibilityVerdict::Occluded);
  // The same neighbours seen from one of them: a single far value does not make it an outlier.
  EXPECT_EQ(classify(buf, 1, {5, 1.0}), VisibilityVerdict::Visible);
}

TEST(Occluded, LosingToMapRayIsOccluded)
{
  const auto buf = build_ray_buffer(cloud_of({through_pixel(3, 4, 5.0)}), cloud_of({through_pixel(3, 4, 4.0)}),
                                    small_camera());
  EXPECT_EQ(classify(buf, 0, {}), VisibilityVerdict::Occluded);
}

TEST(Occluded, OutOfViewPoint)
{
  const auto buf = build_ray_buffer(cloud_of({Point3(0, 0, -5)}), PointCloud(Frame::Vehicle), small_camera());
  EXPECT_EQ(classify(buf, 0, {}), VisibilityVerdict::OutOfView);
}

TEST(Occluded, FewerRejectionsAsCGrows)
{
  std::mt19937 rng(28);
  std::uniform_real_distribution<double> u(-0.09, 0.09), d(3.0, 12.0);
  PointCloud scan(Frame::Vehicle), map(Frame::Vehicle);
  for (int i = 0; i < 600; ++i) {
    const Point3 p = Eigen::Vector3d(u(rng), u(rng), 1.0).normalized() * d(rng);
    (i % 4 == 0 ? map : scan).push_back(p);
  }
  const auto buf = build_ray_buffer(scan, map, small_camera());
  std::vector<bool> prev(scan.size(), true);
  for (double c : {0.25, 0.5, 1.0, 1.5, 2.0, 3.0}) {
    for (std::size_t i = 0; i < scan.size(); ++i) {
      const bool occ = occluded_test(buf, i, {5, c});
      if (!prev[i]) EXPECT_FALSE(occ) << "c " << c;
      prev[i] = occ;
    }
  }
}

TEST(RayFilter, WallBehindBox)
{
  const auto w = testing::wall_behind_box(29);
  const auto buf = build_ray_buffer(w.scan, w.map, w.cam);
  const auto verdicts = classify_all(buf, {5, 1.0});
  std::size_t hidden = 0;
  for (std::size_t i = 0; i < w.scan.size(); ++i) {
    if (w.hidden[i]) {
      ++hidden;
      EXPECT_EQ(verdicts[i], VisibilityVerdict::Occluded) << i;
    } else {
      EXPECT_EQ(verdicts[i], VisibilityVerdict::Visible) << i;
    }
  }
  EXPECT_EQ(hidden, 1600u);
}

TEST(Accumulate, RedPixelColorsTheNewPoint)
{
  const auto cam = small_camera();
  RgbImage img(20, 20, {0, 0, 255});
  img.set(3, 4, {255, 0, 0});
  TexturedMap map;
  const RigidTransform to_local(Eigen::Matrix3d::Identity(), {100, 0, 0});
  const auto st = filter_texture_accumulate(cloud_of({through_pixel(3, 4, 5.0)}), PointCloud(Frame::Vehicle), map,
                                            img, cam, to_local, 7, {});
  EXPECT_EQ(st.appended, 1u);
  ASSERT_EQ(map.size(), 1u);
  EXPECT_EQ(map.cloud().color(0), (ColorRGB{255, 0, 0}));
  EXPECT_LT((map.cloud().point(0) - (to_local * through_pixel(3, 4, 5.0))).norm(), 1e-12);
  EXPECT_EQ(map.frame_ids()[0], 7);
}

TEST(Accumulate, VerdictsFollowTheRules)
{
  std::mt19937 rng(30);
  std::uniform_real_distribution<double> u(-0.09, 0.09), d(3.0, 12.0);
  PointCloud scan(Frame::Vehicle), map_pts(Frame::Vehicle);
  for (int i = 0; i < 400; ++i) {
    const Point3 p = Eigen::Vector3d(u(rng), u(rng), 1.0).normalized() * d(rng);
    (i % 2 == 0 ? map_pts : scan).push_back(p);
  }
  scan.push_back({0, 0, -3});
  const auto cam = small_camera();
  const RgbImage img(20, 20, {9, 9, 9});
  const auto buf = build_ray_buffer(scan, map_pts, cam);
  const auto verdicts = classify_all(buf, {});
  TexturedMap map;
  const auto st = filter_texture_accumulate(scan, map_pts, map, img, cam, {}, 1, {});
  std::size_t visible = 0;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const auto &proj = buf.scan_projection(i);
    VisibilityVerdict expected = VisibilityVerdict::Visible;
    if (!proj) {
      expected = VisibilityVerdict::OutOfView;
    } else if (buf.winner(proj->pixel).origin == RayOrigin::MapPoint) {
      expected = VisibilityVerdict::Occluded;
    } else if (occluding_test(buf, i)) {
      expected = VisibilityVerdict::Occluding;
    } else if (occluded_test(buf, i, {})) {
      expected = VisibilityVerdict::Occluded;
    }
    EXPECT_EQ(verdicts[i], expected);
    visible += expected == VisibilityVerdict::Visible;
  }
  EXPECT_EQ(st.visible, visible);
  EXPECT_EQ(st.appended, visible);
  EXPECT_EQ(st.out_of_view, 1u);
  EXPECT_EQ(st.visible + st.occluded + st.occluding + st.out_of_view, scan.size());
  EXPECT_EQ(map.size(), visible);

  TexturedMap all;
  const auto unfiltered = filter_texture_accumulate(scan, map_pts, all, img, cam, {}, 1, {}, false);
  EXPECT_EQ(unfiltered.appended, scan.size() - 1);
}

TEST(Accumulate, TwoFramesKeepExactSceneColors)
{
  // Flat colors, no checker: a camera-visible point's pixel shows its own
  // surface except within a pixel of a silhouette.
  synth::Scene scene;
  scene.add_rect({{14, -10, -1.73}, {0, 20, 0}, {0, 0, 6}, {60, 120, 220}, std::nullopt, 1.0});
  scene.add_box({8, -1, -1.73}, {9, 1, 0.5}, {250, 200, 20});
  scene.beams.min_elevation_deg = -8.0;
  scene.trajectory = {RigidTransform::identity(), RigidTransform(Eigen::Matrix3d::Identity(), {0.5, 0.1, 0})};
  TexturedMap map;
  for (std::size_t k = 0; k < 2; ++k) {
    const auto f = synth::render_synthetic_frame(scene, k);
    const PointCloud map_fov = transform_cloud(map.cloud(), f.true_pose.inverse(), Frame::Vehicle);
    const std::size_t before = map.size();
    filter_texture_accumulate(f.bundle.scan, map_fov, map, f.bundle.image, f.bundle.cam, f.true_pose, long(k), {});
    std::size_t checked = 0;
    for (std::size_t i = before; i < map.size(); ++i) {
      const Point3 local = map.cloud().point(i);
      const auto sp = synth::nearest_surface(scene, local);
      ASSERT_LT(sp.distance, 1e-9);
      const auto px = project_point(f.true_pose.inverse() * local, f.bundle.cam);
      ASSERT_TRUE(px);
      const Point3 eye = f.true_pose * f.bundle.cam.origin();
      const synth::Hit blocker = synth::cast_ray(scene, eye, local - eye, 1e-9, 1.0 - 1e-9);
      if (blocker) continue;  // seen by the scanner only
      bool uniform = true;
      for (int dv = -1; dv <= 1; ++dv)
        for (int du = -1; du <= 1; ++du) {
          const Pixel q{px->pixel.u + du, px->pixel.v + dv};
          if (f.bundle.cam.contains(q)) uniform &= f.bundle.image.at(q) == f.bundle.image.at(px->pixel);
        }
      if (!uniform) continue;
      ++checked;
      EXPECT_EQ(map.cloud().color(i), sp.color);
    }
    EXPECT_GT(checked, (map.size() - before) * 9 / 10);
  }
}

}  // namespace
}  // namespace texmap
