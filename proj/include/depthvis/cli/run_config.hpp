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
#include <string>
#include <vector>

#include "json.hpp"

#include "depthvis/model/config.hpp"
#include "depthvis/train/stages.hpp"

namespace depthvis::cli {

// The single JSON document driving prepare-depth, train and eval. Every leaf has
// a default; unknown keys and mistyped leaves are rejected (ConfigError).
struct RunConfig {
  struct Model {
    std::string variant = "rgb_baseline";
    std::string backbone = "conv_small";
    int num_queries = 8;
    int num_classes = 3;
    std::vector<int> widths{16, 32, 48, 64};
    int embed_dim = 32;
    double depth_weight = 1.0;
    std::string edc_init = "zero";
  } model;
  struct Data {
    std::string root;
    std::string depth_source = "gt";  // gt | external
    std::string degrade_level = "none";
    std::string estimator;  // command for depth_source external
  } data;
  struct Train {
    std::string stage = "image";
    int iters = 0;  // 0 picks the stage default (300 / 300 / 200 / 200)
    double lr = 1.0e-4;
    double weight_decay = 5.0e-2;
    std::uint64_t seed = 0;
    int batch = 4;
    int clip_length = 5;
  } train;
  struct Eval {
    std::vector<double> iou_thresholds;  // empty -> 0.50:0.05:0.95
  } eval;
  std::string out_dir = "run";
};

// Human-readable schema listing every accepted leaf.
std::string schema_text();

void validate_config_json(const nlohmann::json& j);
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);

// Applies "a.b.c=value"; value is parsed as JSON when possible, else taken as a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

model::ModelConfig model_config(const RunConfig& cfg);
train::StageConfig stage_config(const RunConfig& cfg);
int default_iters(train::Stage stage);

// Name of the per-video depth directory prepare-depth writes and the models read.
inline constexpr const char* kDepthInputDir = "depth_input";

}  // namespace depthvis::cli
