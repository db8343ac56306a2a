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

#include "texmap/config.hpp"
#include "texmap/delaunay.hpp"
#include "texmap/foveal.hpp"
#include "texmap/frame.hpp"
#include "texmap/geometry.hpp"
#include "texmap/ground.hpp"
#include "texmap/image.hpp"
#include "texmap/kdtree.hpp"
#include "texmap/kitti.hpp"
#include "texmap/metrics.hpp"
#include "texmap/pipeline.hpp"
#include "texmap/ply.hpp"
#include "texmap/predicates.hpp"
#include "texmap/rayfilter.hpp"
#include "texmap/registration.hpp"
#include "texmap/scene_json.hpp"
#include "texmap/synthetic.hpp"
#include "texmap/texture_map.hpp"
#include "texmap/upsampler.hpp"
