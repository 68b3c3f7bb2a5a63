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

#include "depthvis/train/data.hpp"

#include <map>

#include "depthvis/core/error.hpp"
#include "depthvis/core/image.hpp"
#include "depthvis/depth/depth_cache.hpp"
#include "depthvis/nn/parameters.hpp"

namespace depthvis::train {

namespace fs = std::filesystem;

const char* to_string(DepthQuality q) { return q == DepthQuality::kGt ? "gt" : "degraded"; }

DepthQuality depth_quality_from_string(const std::string& name) {
  if (name == "gt") return DepthQuality::kGt;
  if (name == "degraded") return DepthQuality::kDegraded;
  throw Error(ErrorKind::kConfigError, "unknown depth quality '" + name + "'");
}

std::uint64_t degrade_seed(std::uint64_t base, int video_id, int frame) {
  return nn::splitmix64(base ^ nn::splitmix64((static_cast<std::uint64_t>(video_id) << 20) + frame));
}

namespace {

std::map<int, int> class_index_map(const core::Dataset& ds) {
  std::map<int, int> m;
  for (std::size_t i = 0; i < ds.categories.size(); ++i) m[ds.categories[i].id] = static_cast<int>(i);
  return m;
}

void fill_gt(VideoData& v, const core::Dataset& ds, const std::map<int, int>& classes) {
  v.gt.assign(v.frames, {});
  for (const auto* a : ds.annotations_for(v.video_id)) {
    const auto masks = core::decode_segmentations(a->segmentations);
    for (int t = 0; t < v.frames; ++t) {
      if (!masks[t] || masks[t]->empty_mask()) continue;
      v.gt[t].push_back({a->instance_id != 0 ? a->instance_id : a->id, classes.at(a->category_id), *masks[t]});
    }
  }
}

void append_rgb(VideoData& v, const core::RgbImage& img) {
  for (uint8_t b : img.data) v.rgb.push_back(b);
}

void append_depth(VideoData& v, const depth::DepthMap& d) {
  const auto n = depth::normalize_depth(d);
  v.depth.insert(v.depth.end(), n.begin(), n.end());
}

}  // namespace

TrainSet make_train_set(const synth::SyntheticDataset& data, DepthQuality quality, std::uint64_t seed) {
  TrainSet set;
  set.annotations = data.annotations;
  set.num_classes = static_cast<int>(data.annotations.categories.size());
  const auto classes = class_index_map(data.annotations);
  for (std::size_t i = 0; i < data.videos.size(); ++i) {
    const auto& info = data.annotations.videos[i];
    const auto& sv = data.videos[i];
    VideoData v;
    v.video_id = info.id;
    v.frames = info.length;
    v.height = info.height;
    v.width = info.width;
    for (int t = 0; t < v.frames; ++t) {
      append_rgb(v, sv.frames[t]);
      const auto level = quality == DepthQuality::kGt ? depth::DegradeLevel::kNone : depth::DegradeLevel::kSmallModel;
      append_depth(v, depth::degrade_depth(sv.gt.depth[t], level, degrade_seed(seed, v.video_id, t)));
    }
    fill_gt(v, data.annotations, classes);
    set.videos.push_back(std::move(v));
  }
  return set;
}

TrainSet load_train_set(const fs::path& root, const std::string& depth_dir, bool require_depth) {
  TrainSet set;
  set.annotations = core::dataset_from_json(core::read_json_file(root / "annotations.json"));
  set.num_classes = static_cast<int>(set.annotations.categories.size());
  const auto classes = class_index_map(set.annotations);
  for (const auto& info : set.annotations.videos) {
    VideoData v;
    v.video_id = info.id;
    v.frames = info.length;
    v.height = info.height;
    v.width = info.width;
    for (int t = 0; t < v.frames; ++t) {
      const fs::path frame = t < static_cast<int>(info.file_names.size())
                                 ? root / info.file_names[t]
                                 : synth::video_dir(root, info.id) / "frames" / synth::frame_file_name(t);
      const auto img = core::read_png_rgb(frame);
      if (img.height != v.height || img.width != v.width) {
        throw Error(ErrorKind::kShapeMismatch, frame.string() + " does not match the annotated size");
      }
      append_rgb(v, img);
    }
    const fs::path ddir = synth::video_dir(root, info.id) / depth_dir;
    if (fs::exists(ddir)) {
      const auto maps = depth::read_depth_cache(ddir);
      if (static_cast<int>(maps.size()) != v.frames) {
        throw Error(ErrorKind::kCorruptCache, ddir.string() + " has the wrong number of frames");
      }
      for (const auto& d : maps) append_depth(v, d);
    } else if (require_depth) {
      throw Error(ErrorKind::kCorruptCache, "missing depth cache " + ddir.string() + " (run prepare-depth)");
    }
    fill_gt(v, set.annotations, classes);
    set.videos.push_back(std::move(v));
  }
  return set;
}

model::FrameBatch make_batch(const TrainSet& data, const std::vector<std::pair<int, int>>& items) {
  model::FrameBatch b;
  if (items.empty()) return b;
  const auto& first = data.videos.at(items[0].first);
  b.batch = static_cast<int>(items.size());
  b.height = first.height;
  b.width = first.width;
  const std::size_t plane = static_cast<std::size_t>(b.height) * b.width;
  bool with_depth = true;
  for (const auto& [vi, t] : items) with_depth = with_depth && !data.videos.at(vi).depth.empty();
  for (const auto& [vi, t] : items) {
    const auto& v = data.videos.at(vi);
    if (v.height != b.height || v.width != b.width) {
      throw Error(ErrorKind::kShapeMismatch, "batch mixes frame sizes");
    }
    const auto rgb0 = v.rgb.begin() + static_cast<std::ptrdiff_t>(t * 3 * plane);
    b.rgb.insert(b.rgb.end(), rgb0, rgb0 + static_cast<std::ptrdiff_t>(3 * plane));
    if (with_depth) {
      const auto d0 = v.depth.begin() + static_cast<std::ptrdiff_t>(t * plane);
      b.depth.insert(b.depth.end(), d0, d0 + static_cast<std::ptrdiff_t>(plane));
    }
  }
  return b;
}

}  // namespace depthvis::train
