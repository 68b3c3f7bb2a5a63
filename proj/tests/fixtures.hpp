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
#include <string>

#include "depthvis/model/config.hpp"
#include "depthvis/synth/scenario.hpp"
#include "depthvis/train/data.hpp"

namespace depthvis::testing {

// Small crossing + exit_enter suite with twin appearance.
inline synth::SyntheticDataset toy_dataset(int per_kind = 2, int frames = 6, int size = 32, uint64_t seed = 21) {
  synth::DatasetSuite suite;
  for (auto kind : {synth::ScenarioKind::kCrossing, synth::ScenarioKind::kExitEnter}) {
    synth::ScenarioSpec s;
    s.kind = kind;
    s.frames = frames;
    s.height = size;
    s.width = size;
    s.appearance_twin = true;
    s.seed = seed++;
    suite.specs.push_back(s);
    suite.counts.push_back(per_kind);
  }
  return synth::generate_dataset(suite);
}

inline model::ModelConfig toy_model(model::Variant v, uint64_t seed = 1) {
  model::ModelConfig c;
  c.variant = v;
  c.backbone.in_channels = v == model::Variant::kEdc ? 4 : 3;
  c.backbone.widths = {8, 8, 16, 16};
  c.embed_dim = 16;
  c.ffn_dim = 32;
  c.depth_dim = 16;
  c.adapter.width = 8;
  c.num_queries = 6;
  c.seed = seed;
  return c;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("depthvis_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace depthvis::testing
