// Copyright 2026 The depthvis Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "depthvis/core/image.hpp"

namespace depthvis::depth {

enum class DepthSource { kSyntheticGt, kExternalEstimator, kCache, kDegraded };

const char* to_string(DepthSource source);
DepthSource depth_source_from_string(const std::string& name);

// Relative per-pixel depth with arbitrary scale. min/max bound the values.
struct DepthMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;
  double min = 0.0;
  double max = 0.0;
  DepthSource source = DepthSource::kSyntheticGt;

  double at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

// Builds a map and computes min/max from the data; throws NonFiniteDepth.
DepthMap make_depth_map(int height, int width, std::vector<double> values, DepthSource source);

// Per-frame min-max scaling to [0, 1]; constant maps become 0.5 everywhere.
std::vector<double> normalize_depth(const DepthMap& d);

// T x 4 x H x W video; channels 0-2 hold the raw 8-bit RGB values, channel 3 the
// normalized depth.
struct RgbdVideo {
  int frames = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  static constexpr int kChannels = 4;

  float at(int t, int c, int y, int x) const {
    return data[((static_cast<std::size_t>(t) * kChannels + c) * height + y) * width + x];
  }
};

RgbdVideo build_rgbd(const std::vector<core::RgbImage>& rgb, const std::vector<DepthMap>& depths);

enum class DegradeLevel { kNone, kSmallModel };

DegradeLevel degrade_level_from_string(const std::string& name);
const char* to_string(DegradeLevel level);

// none: identity. small_model: 4x box downsample, nearest upsample, then additive
// Gaussian noise with sigma = 0.05 * (max - min).
DepthMap degrade_depth(const DepthMap& d, DegradeLevel level, uint64_t seed);

}  // namespace depthvis::depth
