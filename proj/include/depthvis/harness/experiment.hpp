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
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "depthvis/eval/metrics.hpp"
#include "depthvis/model/config.hpp"
#include "depthvis/model/model.hpp"
#include "depthvis/synth/scenario.hpp"
#include "depthvis/track/tracker.hpp"
#include "depthvis/train/data.hpp"

namespace depthvis::harness {

// Iterations and optimizer settings shared by every run of a plan.
struct Schedule {
  int image_iters = 600;
  int segmenter_iters = 300;
  int tracker_iters = 200;
  int refiner_iters = 0;  // 0 skips the refiner stage
  double lr = 1.0e-3;
  double tracker_lr = 1.0e-3;
  double weight_decay = 5.0e-2;
  int batch = 4;
  int clip_length = 5;
  int depth_pretrain_iters = 200;
  double contrastive_weight = 1.0;
};

struct ExperimentPlan {
  std::vector<model::Variant> variants;
  synth::DatasetSuite train_suite;
  synth::DatasetSuite eval_suite;  // held-out videos used for every metric
  std::vector<std::uint64_t> seeds;
  Schedule schedule;
  train::DepthQuality depth_quality = train::DepthQuality::kGt;
  model::ModelConfig model;  // template; variant, input channels and seed are set per run
  track::TrackerConfig tracker;
  bool offline = false;
};

// The setting used for the directional checks: twin-appearance crossing plus
// exit_enter videos, 5 seeds, reduced widths.
ExperimentPlan default_plan();

// Throws InvalidSpec: no variants, fewer than 3 seeds, duplicate seeds, or empty suites.
void validate(const ExperimentPlan& plan);

nlohmann::json to_json(const ExperimentPlan& plan);
ExperimentPlan plan_from_json(const nlohmann::json& j);
std::string plan_hash(const ExperimentPlan& plan, const std::string& table);

enum class EdcStart { kImage, kSegmenter, kNone };
const char* to_string(EdcStart s);

struct RunSpec {
  model::Variant variant = model::Variant::kRgbBaseline;
  std::uint64_t seed = 0;
  train::DepthQuality depth_quality = train::DepthQuality::kGt;
  EdcStart edc_start = EdcStart::kNone;
};

std::string run_label(const RunSpec& spec);

struct RowSummary {
  double ap = 0.0;
  double ap50 = 0.0;
  double ap75 = 0.0;
  double ar10 = 0.0;
  double id_switches = 0.0;
};

struct ComparisonRow {
  std::string label;
  model::Variant variant = model::Variant::kRgbBaseline;
  train::DepthQuality depth_quality = train::DepthQuality::kGt;
  EdcStart edc_start = EdcStart::kNone;
  std::string provenance;
  std::vector<std::uint64_t> seeds;
  std::vector<eval::MetricsReport> per_seed;
  RowSummary median;
  // Median over seeds of (this row - first row), paired by seed.
  RowSummary paired_delta;
};

struct ComparisonTable {
  std::string name;
  std::string plan_hash;
  std::string data_fingerprint;
  std::vector<ComparisonRow> rows;
  std::vector<std::string> anchors;  // full-scale reference numbers, never asserted
};

nlohmann::json to_json(const ComparisonTable& table);
std::string format_table(const ComparisonTable& table);

double median(std::vector<double> values);

// Trains and evaluates (variant, seed) runs; results are cached on disk by a
// hash of everything that influences them, so tables sharing a run reuse it.
class ExperimentRunner {
 public:
  ExperimentRunner(ExperimentPlan plan, std::filesystem::path results_root);

  const ExperimentPlan& plan() const { return plan_; }
  const train::TrainSet& train_set(train::DepthQuality q);
  const train::TrainSet& eval_set(train::DepthQuality q);
  std::string data_fingerprint(train::DepthQuality q);

  // Trains all stages of one run in memory and returns the final model.
  std::unique_ptr<model::VisModel> train_run(const RunSpec& spec, const std::filesystem::path& log_dir);
  eval::MetricsReport run(const RunSpec& spec, const std::filesystem::path& log_dir);

  ComparisonTable table(const std::string& name, const std::vector<std::vector<RunSpec>>& rows,
                        const std::vector<std::string>& provenance, const std::vector<std::string>& anchors);

  std::function<void(const std::string&)> progress;

 private:
  ExperimentPlan plan_;
  std::filesystem::path root_;
  std::unique_ptr<synth::SyntheticDataset> train_raw_;
  std::unique_ptr<synth::SyntheticDataset> eval_raw_;
  std::unique_ptr<train::TrainSet> train_sets_[2];
  std::unique_ptr<train::TrainSet> eval_sets_[2];
  std::string run_key(const RunSpec& spec) const;
};

// Each writes comparison.json and comparison.txt under results_root/<plan hash>/.
ComparisonTable run_comparison(const ExperimentPlan& plan, const std::filesystem::path& results_root);
ComparisonTable ablate_depth_quality(const ExperimentPlan& plan, const std::filesystem::path& results_root);
ComparisonTable ablate_edc_stage(const ExperimentPlan& plan, const std::filesystem::path& results_root);

}  // namespace depthvis::harness
