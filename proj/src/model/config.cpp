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

#include "depthvis/model/config.hpp"

#include "depthvis/core/error.hpp"

namespace depthvis::model {

const char* to_string(Variant v) {
  switch (v) {
    case Variant::kRgbBaseline: return "rgb_baseline";
    case Variant::kEdc: return "edc";
    case Variant::kSv: return "sv";
    case Variant::kDs: return "ds";
    case Variant::kDsQuery: return "ds_query";
  }
  return "rgb_baseline";
}

Variant variant_from_string(const std::string& name) {
  if (name == "rgb_baseline") return Variant::kRgbBaseline;
  if (name == "edc") return Variant::kEdc;
  if (name == "sv") return Variant::kSv;
  if (name == "ds") return Variant::kDs;
  if (name == "ds_query") return Variant::kDsQuery;
  throw Error(ErrorKind::kConfigError, "unknown variant '" + name + "'");
}

const char* to_string(BackboneKind k) {
  return k == BackboneKind::kConvSmall ? "conv_small" : "vit_tiny";
}

BackboneKind backbone_kind_from_string(const std::string& name) {
  if (name == "conv_small") return BackboneKind::kConvSmall;
  if (name == "vit_tiny") return BackboneKind::kVitTiny;
  throw Error(ErrorKind::kConfigError, "unknown backbone '" + name + "'");
}

const char* to_string(EdcInit m) { return m == EdcInit::kZero ? "zero" : "rgb_mean"; }

EdcInit edc_init_from_string(const std::string& name) {
  if (name == "zero") return EdcInit::kZero;
  if (name == "rgb_mean") return EdcInit::kRgbMean;
  throw Error(ErrorKind::kConfigError, "unknown edc init mode '" + name + "'");
}

bool uses_depth_input(Variant v) { return v == Variant::kEdc; }

bool has_depth_head(Variant v) {
  return v == Variant::kSv || v == Variant::kDs || v == Variant::kDsQuery;
}

void validate(const ModelConfig& cfg) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::kConfigError, msg); };
  const auto& bb = cfg.backbone;
  if (bb.in_channels != 3 && bb.in_channels != 4) fail("backbone.in_channels must be 3 or 4");
  if (cfg.variant == Variant::kEdc && bb.in_channels != 4) fail("edc requires in_channels == 4");
  if (cfg.variant != Variant::kEdc && bb.in_channels != 3) {
    fail(std::string(to_string(cfg.variant)) + " requires in_channels == 3");
  }
  if (bb.kind == BackboneKind::kConvSmall) {
    if (bb.widths.size() < 2) fail("conv_small needs at least 2 stages");
    if (bb.widths.size() != bb.depths.size()) fail("backbone widths and depths differ in length");
    for (int w : bb.widths) {
      if (w <= 0) fail("backbone widths must be positive");
    }
    for (int d : bb.depths) {
      if (d < 0) fail("backbone depths must be non-negative");
    }
  } else {
    if (bb.patch != 8) fail("vit_tiny uses patch size 8");
    if (bb.dim <= 0 || bb.blocks < 1) fail("vit_tiny needs dim > 0 and at least one block");
  }
  if (cfg.adapter.injector) fail("adapter injector is not supported; the shared backbone stays frozen");
  if (cfg.num_queries < 1 || cfg.num_classes < 1) fail("num_queries and num_classes must be >= 1");
  if (cfg.embed_dim < 2 || cfg.embed_dim % 2 != 0) fail("embed_dim must be even and >= 2");
  if (cfg.decoder_layers < 1) fail("decoder_layers must be >= 1");
  if (cfg.depth_weight < 0.0) fail("depth_weight must be >= 0");
}

nlohmann::json to_json(const ModelConfig& cfg) {
  const auto& bb = cfg.backbone;
  return {
      {"variant", to_string(cfg.variant)},
      {"backbone",
       {{"kind", to_string(bb.kind)},
        {"in_channels", bb.in_channels},
        {"widths", bb.widths},
        {"depths", bb.depths},
        {"patch", bb.patch},
        {"dim", bb.dim},
        {"blocks", bb.blocks},
        {"mlp_ratio", bb.mlp_ratio}}},
      {"adapter", {{"width", cfg.adapter.width}, {"injector", cfg.adapter.injector}}},
      {"num_queries", cfg.num_queries},
      {"num_classes", cfg.num_classes},
      {"embed_dim", cfg.embed_dim},
      {"decoder_layers", cfg.decoder_layers},
      {"ffn_dim", cfg.ffn_dim},
      {"depth_dim", cfg.depth_dim},
      {"depth_weight", cfg.depth_weight},
      {"edc_init", to_string(cfg.edc_init)},
      {"seed", cfg.seed},
  };
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  try {
    cfg.variant = variant_from_string(j.value("variant", std::string("rgb_baseline")));
    if (j.contains("backbone")) {
      const auto& b = j.at("backbone");
      auto& bb = cfg.backbone;
      bb.kind = backbone_kind_from_string(b.value("kind", std::string("conv_small")));
      bb.in_channels = b.value("in_channels", uses_depth_input(cfg.variant) ? 4 : 3);
      bb.widths = b.value("widths", bb.widths);
      bb.depths = b.value("depths", bb.depths);
      bb.patch = b.value("patch", bb.patch);
      bb.dim = b.value("dim", bb.dim);
      bb.blocks = b.value("blocks", bb.blocks);
      bb.mlp_ratio = b.value("mlp_ratio", bb.mlp_ratio);
    } else {
      cfg.backbone.in_channels = uses_depth_input(cfg.variant) ? 4 : 3;
    }
    if (j.contains("adapter")) {
      cfg.adapter.width = j.at("adapter").value("width", cfg.adapter.width);
      cfg.adapter.injector = j.at("adapter").value("injector", cfg.adapter.injector);
    }
    cfg.num_queries = j.value("num_queries", cfg.num_queries);
    cfg.num_classes = j.value("num_classes", cfg.num_classes);
    cfg.embed_dim = j.value("embed_dim", cfg.embed_dim);
    cfg.decoder_layers = j.value("decoder_layers", cfg.decoder_layers);
    cfg.ffn_dim = j.value("ffn_dim", cfg.ffn_dim);
    cfg.depth_dim = j.value("depth_dim", cfg.depth_dim);
    cfg.depth_weight = j.value("depth_weight", cfg.depth_weight);
    cfg.edc_init = edc_init_from_string(j.value("edc_init", std::string("zero")));
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfigError, std::string("model config: ") + e.what());
  }
  return cfg;
}

}  // namespace depthvis::model
