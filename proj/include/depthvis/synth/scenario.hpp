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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "depthvis/core/annotations.hpp"
#include "depthvis/core/image.hpp"
#include "depthvis/core/mask.hpp"
#include "depthvis/depth/depth_map.hpp"

namespace depthvis::synth {

enum class ShapeKind { kDisk = 0, kRectangle = 1, kTriangle = 2 };
inline constexpr int kNumShapeKinds = 3;

enum class ScenarioKind { kCrossing, kOcclusion, kExitEnter };

const char* to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& name);
const char* shape_name(ShapeKind shape);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::kCrossing;
  int num_objects = 2;
  int frames = 12;
  int height = 48;
  int width = 48;
  bool appearance_twin = false;
  uint64_t seed = 0;
  // Object radius in pixels; 0 picks min(height, width) / 6.
  int object_size = 0;

  bool operator==(const ScenarioSpec&) const = default;
};

nlohmann::json spec_to_json(const ScenarioSpec& spec);
ScenarioSpec spec_from_json(const nlohmann::json& j);

// Throws InvalidSpec for degenerate settings.
void validate(const ScenarioSpec& spec);

struct Appearance {
  std::array<uint8_t, 3> color{};
  double texture_phase = 0.0;
};

// State of one object at a single time step.
struct ObjectState {
  ShapeKind shape = ShapeKind::kDisk;
  Appearance appearance;
  double cx = 0.0;
  double cy = 0.0;
  double z = 1.0;
  double size = 6.0;
};

struct ObjectPrimitive {
  ShapeKind shape = ShapeKind::kDisk;
  Appearance appearance;
  std::vector<std::array<double, 2>> trajectory;
  std::vector<double> depth_track;
  double size = 6.0;

  ObjectState at(int t) const;
};

struct RenderSettings {
  int height = 48;
  int width = 48;
  std::array<uint8_t, 3> background{40, 40, 40};
  double far_depth = 100.0;
};

struct RenderedFrame {
  core::RgbImage rgb;
  depth::DepthMap depth;
  std::vector<core::BinaryMask> masks;  // visible (post-occlusion), one per object
};

// Painter's algorithm: farther objects are drawn first, nearer ones overwrite them.
RenderedFrame render_frame(const std::vector<ObjectState>& world, const RenderSettings& settings);

// Full-frame coverage of a single object ignoring occluders.
core::BinaryMask shape_coverage(const ObjectState& object, int height, int width);

struct GroundTruth {
  std::vector<core::VideoAnnotation> annotations;
  std::vector<depth::DepthMap> depth;
  std::vector<std::vector<double>> visibility;  // [frame][object]
};

struct SyntheticVideo {
  std::vector<core::RgbImage> frames;
  GroundTruth gt;
  std::vector<ObjectPrimitive> objects;
};

// Deterministic in (spec, video_index). Annotation ids are offset by first_annotation_id.
SyntheticVideo generate_scenario(const ScenarioSpec& spec, int video_index = 0, int video_id = 0,
                                 int first_annotation_id = 1);

std::vector<core::Category> shape_categories();

// Dataset layout:
//   <root>/annotations.json, <root>/spec.json,
//   <root>/videos/<id>/frames/frame_%06d.png, <root>/videos/<id>/depth/...
struct DatasetSuite {
  std::vector<ScenarioSpec> specs;  // one entry per group of videos
  std::vector<int> counts;
};

core::Dataset write_dataset(const std::filesystem::path& root, const DatasetSuite& suite);

std::filesystem::path video_dir(const std::filesystem::path& root, int video_id);
std::string frame_file_name(int t);

// In-memory form of a generated suite, used by the experiment harness.
struct SyntheticDataset {
  core::Dataset annotations;
  std::vector<SyntheticVideo> videos;
};

SyntheticDataset generate_dataset(const DatasetSuite& suite);

}  // namespace depthvis::synth
