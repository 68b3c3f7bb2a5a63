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
#include <utility>
#include <vector>

#include "depthvis/core/annotations.hpp"
#include "depthvis/depth/depth_map.hpp"
#include "depthvis/model/model.hpp"
#include "depthvis/synth/scenario.hpp"
#include "depthvis/train/losses.hpp"

namespace depthvis::train {

// One video in training layout.
struct VideoData {
  int video_id = 0;
  int frames = 0;
  int height = 0;
  int width = 0;
  std::vector<double> rgb;    // T x 3 x H x W, raw 0..255
  std::vector<double> depth;  // T x H x W normalised depth; empty when unavailable
  std::vector<std::vector<GtInstance>> gt;  // per frame, visible instances only
};

struct TrainSet {
  core::Dataset annotations;
  std::vector<VideoData> videos;
  int num_classes = 0;
};

enum class DepthQuality { kGt, kDegraded };

const char* to_string(DepthQuality q);
DepthQuality depth_quality_from_string(const std::string& name);

// Seed of the degradation noise for one frame.
std::uint64_t degrade_seed(std::uint64_t base, int video_id, int frame);

// From an in-memory synthetic dataset; degraded depth uses degrade_depth(small_model).
TrainSet make_train_set(const synth::SyntheticDataset& data, DepthQuality quality, std::uint64_t seed = 0);

// From a dataset directory. Depth is read from videos/<id>/<depth_dir> when the
// directory exists; `require_depth` turns its absence into CorruptCache.
TrainSet load_train_set(const std::filesystem::path& root, const std::string& depth_dir, bool require_depth);

// Frames (video index, frame index) stacked into a model batch.
model::FrameBatch make_batch(const TrainSet& data, const std::vector<std::pair<int, int>>& items);

}  // namespace depthvis::train
