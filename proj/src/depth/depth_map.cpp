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

#include "depthvis/depth/depth_map.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "depthvis/core/error.hpp"

namespace depthvis::depth {

const char* to_string(DepthSource source) {
  switch (source) {
    case DepthSource::kSyntheticGt: return "synthetic_gt";
    case DepthSource::kExternalEstimator: return "external_estimator";
    case DepthSource::kCache: return "cache";
    case DepthSource::kDegraded: return "degraded";
  }
  return "cache";
}

DepthSource depth_source_from_string(const std::string& name) {
  if (name == "synthetic_gt") return DepthSource::kSyntheticGt;
  if (name == "external_estimator") return DepthSource::kExternalEstimator;
  if (name == "cache") return DepthSource::kCache;
  if (name == "degraded") return DepthSource::kDegraded;
  throw Error(ErrorKind::kCorruptCache, "unknown depth source '" + name + "'");
}

DepthMap make_depth_map(int height, int width, std::vector<double> values, DepthSource source) {
  if (values.size() != static_cast<std::size_t>(height) * width || values.empty()) {
    throw Error(ErrorKind::kShapeMismatch, "depth values do not match dimensions");
  }
  DepthMap d{height, width, std::move(values), 0.0, 0.0, source};
  d.min = d.values.front();
  d.max = d.values.front();
  for (double v : d.values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kNonFiniteDepth, "non-finite depth value");
    d.min = std::min(d.min, v);
    d.max = std::max(d.max, v);
  }
  return d;
}

std::vector<double> normalize_depth(const DepthMap& d) {
  if (d.values.empty()) return {};
  double lo = d.values.front();
  double hi = d.values.front();
  for (double v : d.values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kNonFiniteDepth, "non-finite depth value");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::vector<double> out(d.values.size(), 0.5);
  if (hi == lo) return out;
  const double range = hi - lo;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::clamp((d.values[i] - lo) / range, 0.0, 1.0);
  }
  return out;
}

RgbdVideo build_rgbd(const std::vector<core::RgbImage>& rgb, const std::vector<DepthMap>& depths) {
  if (rgb.empty() || rgb.size() != depths.size()) {
    throw Error(ErrorKind::kShapeMismatch, "rgb and depth frame counts differ");
  }
  RgbdVideo video;
  video.frames = static_cast<int>(rgb.size());
  video.height = rgb.front().height;
  video.width = rgb.front().width;
  const std::size_t plane = static_cast<std::size_t>(video.height) * video.width;
  video.data.resize(plane * RgbdVideo::kChannels * video.frames);
  for (int t = 0; t < video.frames; ++t) {
    const auto& frame = rgb[t];
    const auto& d = depths[t];
    if (frame.height != video.height || frame.width != video.width || d.height != video.height ||
        d.width != video.width) {
      throw Error(ErrorKind::kShapeMismatch, "frame " + std::to_string(t) + " size differs");
    }
    float* base = video.data.data() + plane * RgbdVideo::kChannels * t;
    for (std::size_t i = 0; i < plane * 3; ++i) base[i] = static_cast<float>(frame.data[i]);
    const auto norm = normalize_depth(d);
    for (std::size_t i = 0; i < plane; ++i) base[plane * 3 + i] = static_cast<float>(norm[i]);
  }
  return video;
}

DegradeLevel degrade_level_from_string(const std::string& name) {
  if (name == "none") return DegradeLevel::kNone;
  if (name == "small_model") return DegradeLevel::kSmallModel;
  throw Error(ErrorKind::kConfigError, "unknown degrade level '" + name + "'");
}

const char* to_string(DegradeLevel level) {
  return level == DegradeLevel::kNone ? "none" : "small_model";
}

DepthMap degrade_depth(const DepthMap& d, DegradeLevel level, uint64_t seed) {
  if (level == DegradeLevel::kNone) return d;
  constexpr int kFactor = 4;
  const int h = d.height;
  const int w = d.width;
  const int bh = (h + kFactor - 1) / kFactor;
  const int bw = (w + kFactor - 1) / kFactor;
  std::vector<double> blocks(static_cast<std::size_t>(bh) * bw, 0.0);
  for (int by = 0; by < bh; ++by) {
    for (int bx = 0; bx < bw; ++bx) {
      double sum = 0.0;
      int n = 0;
      for (int y = by * kFactor; y < std::min(h, (by + 1) * kFactor); ++y) {
        for (int x = bx * kFactor; x < std::min(w, (bx + 1) * kFactor); ++x) {
          sum += d.at(y, x);
          ++n;
        }
      }
      blocks[static_cast<std::size_t>(by) * bw + bx] = sum / n;
    }
  }
  const double sigma = 0.05 * (d.max - d.min);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> values(d.values.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double base = blocks[static_cast<std::size_t>(y / kFactor) * bw + x / kFactor];
      values[static_cast<std::size_t>(y) * w + x] = base + sigma * noise(rng);
    }
  }
  return make_depth_map(h, w, std::move(values), DepthSource::kDegraded);
}

}  // namespace depthvis::depth
