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

namespace depthvis::model {

enum class Variant { kRgbBaseline, kEdc, kSv, kDs, kDsQuery };
enum class BackboneKind { kConvSmall, kVitTiny };
enum class EdcInit { kZero, kRgbMean };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& name);
const char* to_string(BackboneKind k);
BackboneKind backbone_kind_from_string(const std::string& name);
const char* to_string(EdcInit m);
EdcInit edc_init_from_string(const std::string& name);

struct BackboneConfig {
  BackboneKind kind = BackboneKind::kConvSmall;
  int in_channels = 3;
  // conv_small: one entry per stage, stage k runs at stride 2^(k+1).
  std::vector<int> widths{32, 64, 128, 128};
  std::vector<int> depths{1, 1, 1, 1};
  // vit_tiny
  int patch = 8;
  int dim = 128;
  int blocks = 4;
  int mlp_ratio = 2;

  bool operator==(const BackboneConfig&) const = default;
};

struct AdapterConfig {
  int width = 32;
  // Adapter-to-backbone feature injection. Not supported: the shared backbone
  // must stay untouched.
  bool injector = false;

  bool operator==(const AdapterConfig&) const = default;
};

struct ModelConfig {
  Variant variant = Variant::kRgbBaseline;
  BackboneConfig backbone;
  AdapterConfig adapter;
  int num_queries = 8;
  int num_classes = 3;
  int embed_dim = 32;
  int decoder_layers = 2;
  int ffn_dim = 64;
  int depth_dim = 32;
  double depth_weight = 1.0;
  EdcInit edc_init = EdcInit::kZero;
  std::uint64_t seed = 0;

  bool operator==(const ModelConfig&) const = default;
};

// Variant-specific invariants; throws ConfigError.
void validate(const ModelConfig& cfg);

bool uses_depth_input(Variant v);
bool has_depth_head(Variant v);

nlohmann::json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace depthvis::model
