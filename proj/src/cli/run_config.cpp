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

#include "depthvis/cli/run_config.hpp"

#include <map>
#include <sstream>

#include "depthvis/core/annotations.hpp"
#include "depthvis/core/error.hpp"
#include "depthvis/depth/depth_map.hpp"

namespace depthvis::cli {

using nlohmann::json;

namespace {

enum class Leaf { kString, kInt, kNonNegInt, kPositiveInt, kNumber, kIntArray, kNumberArray };

struct LeafSpec {
  Leaf kind;
  std::vector<std::string> choices;
};

const std::map<std::string, LeafSpec>& schema() {
  static const std::map<std::string, LeafSpec> s{
      {"model.variant", {Leaf::kString, {"rgb_baseline", "edc", "sv", "ds", "ds_query"}}},
      {"model.backbone", {Leaf::kString, {"conv_small", "vit_tiny"}}},
      {"model.num_queries", {Leaf::kPositiveInt, {}}},
      {"model.num_classes", {Leaf::kPositiveInt, {}}},
      {"model.widths", {Leaf::kIntArray, {}}},
      {"model.embed_dim", {Leaf::kPositiveInt, {}}},
      {"model.depth_weight", {Leaf::kNumber, {}}},
      {"model.edc_init", {Leaf::kString, {"zero", "rgb_mean"}}},
      {"data.root", {Leaf::kString, {}}},
      {"data.depth_source", {Leaf::kString, {"gt", "external"}}},
      {"data.degrade_level", {Leaf::kString, {"none", "small_model"}}},
      {"data.estimator", {Leaf::kString, {}}},
      {"train.stage", {Leaf::kString, {"image", "segmenter", "tracker", "refiner"}}},
      {"train.iters", {Leaf::kNonNegInt, {}}},
      {"train.lr", {Leaf::kNumber, {}}},
      {"train.weight_decay", {Leaf::kNumber, {}}},
      {"train.seed", {Leaf::kNonNegInt, {}}},
      {"train.batch", {Leaf::kPositiveInt, {}}},
      {"train.clip_length", {Leaf::kPositiveInt, {}}},
      {"eval.iou_thresholds", {Leaf::kNumberArray, {}}},
      {"out_dir", {Leaf::kString, {}}},
  };
  return s;
}

const char* leaf_name(Leaf k) {
  switch (k) {
    case Leaf::kString: return "string";
    case Leaf::kInt: return "integer";
    case Leaf::kNonNegInt: return "integer >= 0";
    case Leaf::kPositiveInt: return "integer >= 1";
    case Leaf::kNumber: return "number >= 0";
    case Leaf::kIntArray: return "array of integers >= 1";
    case Leaf::kNumberArray: return "array of numbers in (0, 1]";
  }
  return "?";
}

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::kConfigError, msg); }

void check_leaf(const std::string& path, const LeafSpec& spec, const json& v) {
  const auto expect = [&](bool ok) {
    if (!ok) bad("config key '" + path + "' must be " + leaf_name(spec.kind) + ", got " + v.dump());
  };
  switch (spec.kind) {
    case Leaf::kString:
      expect(v.is_string());
      if (!spec.choices.empty()) {
        const auto s = v.get<std::string>();
        bool found = false;
        for (const auto& c : spec.choices) found = found || c == s;
        if (!found) {
          std::string list;
          for (const auto& c : spec.choices) list += (list.empty() ? "" : ", ") + c;
          bad("config key '" + path + "' must be one of {" + list + "}, got '" + s + "'");
        }
      }
      break;
    case Leaf::kInt: expect(v.is_number_integer()); break;
    case Leaf::kNonNegInt: expect(v.is_number_integer() && v.get<long long>() >= 0); break;
    case Leaf::kPositiveInt: expect(v.is_number_integer() && v.get<long long>() >= 1); break;
    case Leaf::kNumber: expect(v.is_number() && v.get<double>() >= 0.0); break;
    case Leaf::kIntArray:
      expect(v.is_array() && !v.empty());
      for (const auto& e : v) expect(e.is_number_integer() && e.get<long long>() >= 1);
      break;
    case Leaf::kNumberArray:
      expect(v.is_array());
      for (const auto& e : v) expect(e.is_number() && e.get<double>() > 0.0 && e.get<double>() <= 1.0);
      break;
  }
}

void walk(const json& j, const std::string& prefix) {
  if (!j.is_object()) bad("config section '" + (prefix.empty() ? std::string("<root>") : prefix) + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    const auto it = schema().find(path);
    if (it != schema().end()) {
      check_leaf(path, it->second, value);
      continue;
    }
    bool is_section = false;
    for (const auto& [leaf, spec] : schema()) is_section = is_section || leaf.rfind(path + ".", 0) == 0;
    if (!is_section) bad("unknown config key '" + path + "'");
    walk(value, path);
  }
}

template <typename T>
void read(const json& j, const char* section, const char* key, T& out) {
  if (j.contains(section) && j.at(section).contains(key)) out = j.at(section).at(key).get<T>();
}

}  // namespace

std::string schema_text() {
  std::ostringstream os;
  os << "RunConfig schema (all keys optional, unknown keys rejected):\n";
  for (const auto& [path, spec] : schema()) {
    os << "  " << path << ": " << leaf_name(spec.kind);
    if (!spec.choices.empty()) {
      os << " {";
      for (std::size_t i = 0; i < spec.choices.size(); ++i) os << (i ? "|" : "") << spec.choices[i];
      os << "}";
    }
    os << "\n";
  }
  return os.str();
}

void validate_config_json(const json& j) { walk(j, ""); }

RunConfig config_from_json(const json& j) {
  validate_config_json(j);
  RunConfig c;
  read(j, "model", "variant", c.model.variant);
  read(j, "model", "backbone", c.model.backbone);
  read(j, "model", "num_queries", c.model.num_queries);
  read(j, "model", "num_classes", c.model.num_classes);
  read(j, "model", "widths", c.model.widths);
  read(j, "model", "embed_dim", c.model.embed_dim);
  read(j, "model", "depth_weight", c.model.depth_weight);
  read(j, "model", "edc_init", c.model.edc_init);
  read(j, "data", "root", c.data.root);
  read(j, "data", "depth_source", c.data.depth_source);
  read(j, "data", "degrade_level", c.data.degrade_level);
  read(j, "data", "estimator", c.data.estimator);
  read(j, "train", "stage", c.train.stage);
  read(j, "train", "iters", c.train.iters);
  read(j, "train", "lr", c.train.lr);
  read(j, "train", "weight_decay", c.train.weight_decay);
  read(j, "train", "seed", c.train.seed);
  read(j, "train", "batch", c.train.batch);
  read(j, "train", "clip_length", c.train.clip_length);
  read(j, "eval", "iou_thresholds", c.eval.iou_thresholds);
  if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  model::validate(model_config(c));
  return c;
}

json to_json(const RunConfig& c) {
  return {{"model",
           {{"variant", c.model.variant},
            {"backbone", c.model.backbone},
            {"num_queries", c.model.num_queries},
            {"num_classes", c.model.num_classes},
            {"widths", c.model.widths},
            {"embed_dim", c.model.embed_dim},
            {"depth_weight", c.model.depth_weight},
            {"edc_init", c.model.edc_init}}},
          {"data",
           {{"root", c.data.root},
            {"depth_source", c.data.depth_source},
            {"degrade_level", c.data.degrade_level},
            {"estimator", c.data.estimator}}},
          {"train",
           {{"stage", c.train.stage},
            {"iters", c.train.iters},
            {"lr", c.train.lr},
            {"weight_decay", c.train.weight_decay},
            {"seed", c.train.seed},
            {"batch", c.train.batch},
            {"clip_length", c.train.clip_length}}},
          {"eval", {{"iou_thresholds", c.eval.iou_thresholds}}},
          {"out_dir", c.out_dir}};
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) bad("--set expects path=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  if (!schema().count(path)) bad("unknown config key '" + path + "' in --set");
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      break;
    }
    if (!node->contains(key)) (*node)[key] = json::object();
    node = &(*node)[key];
    start = dot + 1;
  }
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  json j = json::object();
  if (!path.empty()) {
    try {
      j = core::read_json_file(path);
    } catch (const Error& e) {
      bad(std::string("cannot read config: ") + e.what());
    }
  }
  for (const auto& o : overrides) apply_override(j, o);
  return config_from_json(j);
}

model::ModelConfig model_config(const RunConfig& c) {
  model::ModelConfig m;
  m.variant = model::variant_from_string(c.model.variant);
  m.backbone.kind = model::backbone_kind_from_string(c.model.backbone);
  m.backbone.in_channels = model::uses_depth_input(m.variant) ? 4 : 3;
  m.backbone.widths = c.model.widths;
  m.backbone.depths.assign(c.model.widths.size(), 1);
  m.num_queries = c.model.num_queries;
  m.num_classes = c.model.num_classes;
  m.embed_dim = c.model.embed_dim;
  m.depth_weight = c.model.depth_weight;
  m.edc_init = model::edc_init_from_string(c.model.edc_init);
  m.seed = c.train.seed;
  return m;
}

int default_iters(train::Stage stage) {
  switch (stage) {
    case train::Stage::kImage:
    case train::Stage::kSegmenter: return 300;
    case train::Stage::kTracker:
    case train::Stage::kRefiner: return 200;
  }
  return 300;
}

train::StageConfig stage_config(const RunConfig& c) {
  train::StageConfig s;
  s.stage = train::stage_from_string(c.train.stage);
  s.iters = c.train.iters > 0 ? c.train.iters : default_iters(s.stage);
  s.lr = c.train.lr;
  s.weight_decay = c.train.weight_decay;
  s.seed = c.train.seed;
  s.batch = c.train.batch;
  s.clip_length = c.train.clip_length;
  return s;
}

}  // namespace depthvis::cli
