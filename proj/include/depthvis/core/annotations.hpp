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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "depthvis/core/mask.hpp"
#include "depthvis/core/rle.hpp"

namespace depthvis::core {

struct VideoInfo {
  int id = 0;
  int width = 0;
  int height = 0;
  int length = 0;
  std::vector<std::string> file_names;
};

struct Category {
  int id = 0;
  std::string name;
};

// Ground truth for one instance across a whole video.
struct VideoAnnotation {
  int id = 0;
  int video_id = 0;
  int category_id = 0;
  int instance_id = 0;
  std::vector<std::optional<Rle>> segmentations;
};

// A video-level instance produced by the tracker (or refiner).
struct InstanceTrack {
  int track_id = 0;
  int category_id = 0;
  double score = 0.0;
  MaskTrack masks;
};

struct Prediction {
  int video_id = 0;
  int category_id = 0;
  double score = 0.0;
  std::vector<std::optional<Rle>> segmentations;
  std::optional<int> track_id;
};

struct Dataset {
  std::vector<VideoInfo> videos;
  std::vector<Category> categories;
  std::vector<VideoAnnotation> annotations;

  const VideoInfo* find_video(int video_id) const;
  std::vector<const VideoAnnotation*> annotations_for(int video_id) const;
};

nlohmann::json rle_to_json(const Rle& rle);
Rle rle_from_json(const nlohmann::json& j);

nlohmann::json dataset_to_json(const Dataset& ds);
Dataset dataset_from_json(const nlohmann::json& j);

nlohmann::json predictions_to_json(const std::vector<Prediction>& preds);
std::vector<Prediction> predictions_from_json(const nlohmann::json& j);

// Per-video track dump: {video_id, tracks:[{track_id, category_id, score, segmentations}]}.
nlohmann::json tracks_to_json(int video_id, const std::vector<InstanceTrack>& tracks);
std::vector<InstanceTrack> tracks_from_json(const nlohmann::json& j, int* video_id = nullptr);

Prediction track_to_prediction(int video_id, const InstanceTrack& track);
MaskTrack decode_segmentations(const std::vector<std::optional<Rle>>& segs);
std::vector<std::optional<Rle>> encode_segmentations(const MaskTrack& masks);

nlohmann::json read_json_file(const std::filesystem::path& path);
// Writes through a temporary file and renames it into place.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j, int indent = -1);

}  // namespace depthvis::core
