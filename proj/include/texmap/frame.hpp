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

#include "texmap/geometry.hpp"
#include "texmap/image.hpp"

#include <stdexcept>
#include <string>

namespace texmap
{

/// One time-synchronized (scan, image, navigation pose) unit.
struct FrameBundle
{
  PointCloud scan;            // vehicle frame
  RgbImage image;
  RigidTransform raw_pose;    // vehicle -> local
  CameraModel cam;            // vehicle -> camera
  double timestamp{0.0};      // seconds
  long frame_id{0};

  void validate() const
  {
    const std::string where = "FrameBundle " + std::to_string(frame_id) + ": ";
    if (scan.frame() != Frame::Vehicle) throw std::invalid_argument(where + "scan must be in the vehicle frame");
    if (scan.empty()) throw std::invalid_argument(where + "empty scan");
    if (image.width() != cam.width() || image.height() != cam.height()) {
      throw std::invalid_argument(where + "image is " + std::to_string(image.width()) + "x" +
                                  std::to_string(image.height()) + " but the camera expects " +
                                  std::to_string(cam.width()) + "x" + std::to_string(cam.height()));
    }
    if (!raw_pose.is_valid()) throw std::invalid_argument(where + "invalid raw pose");
  }
};

}  // namespace texmap
