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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "depthvis/model/model.hpp"
#include "depthvis/track/tracker.hpp"
#include "depthvis/train/data.hpp"
#include "depthvis/train/losses.hpp"

namespace depthvis::train {

enum class Stage { kImage, kSegmenter, kTracker, kRefiner };

const char* to_string(Stage s);
Stage stage_from_string(const std::string& name);
std::optional<Stage> predecessor(Stage s);

struct StageConfig {
  Stage stage = Stage::kImage;
  int iters = 300;
  double lr = 1.0e-4;
  double weight_decay = 5.0e-2;
  std::uint64_t seed = 0;
  int batch = 4;        // frames per step in the image stage
  int clip_length = 5;  // contiguous frames per step in the video stages
  double clip_norm = 0.0;
  // sv only: steps spent fitting the shared backbone's depth head before it is
  // frozen (stands in for a pretrained depth estimator).
  int depth_pretrain_iters = 200;
  double temperature = 0.1;  // contrastive losses (segmenter and tracker)
  // Segmenter stage: weight of the cross-frame contrastive term on matched query
  // embeddings (clip-level instance contrast).
  double contrastive_weight = 1.0;
  std::optional<std::filesystem::path> init_from;
};

struct LogRecord {
  int iter = 0;
  Stage stage = Stage::kImage;
  double loss_total = 0.0;
  double loss_cls = 0.0;
  double loss_mask = 0.0;
  double loss_dice = 0.0;
  double loss_depth = 0.0;
  double lr = 0.0;
};

nlohmann::json to_json(const LogRecord& r);
nlohmann::json config_echo(const StageConfig& cfg);

// Parameter prefixes a stage may update (before variant-level freezing).
std::vector<std::string> trainable_prefixes(Stage stage, const model::VisModel& model);

// Marks exactly the stage's parameters trainable; everything else is frozen.
void apply_stage_freezing(model::VisModel& model, Stage stage);

// Trains `model` in place for one stage and returns the per-iteration log.
std::vector<LogRecord> train_stage(model::VisModel& model, const StageConfig& cfg, const TrainSet& data,
                                   const LossWeights& weights = {}, const track::TrackerConfig& tracker = {});

// Fits the backbone and depth head to the depth targets with the SSI loss and
// then freezes them.
std::vector<LogRecord> pretrain_depth(model::VisModel& model, const TrainSet& data, int iters, double lr,
                                      std::uint64_t seed, int batch);

// Segmenter outputs for every frame of every video (no graph recorded).
std::vector<std::vector<track::FrameQueries>> segment_videos(const model::VisModel& model, const TrainSet& data);
std::vector<track::FrameQueries> segment_video(const model::VisModel& model, const TrainSet& data, int video);

struct StageResult {
  std::unique_ptr<model::VisModel> model;
  std::vector<LogRecord> log;
};

// Stage with ordering checks and persistence. The image stage builds a fresh
// model from `model_cfg`; later stages load cfg.init_from, which must hold the
// predecessor stage's checkpoint (MissingPredecessor / StageOrderViolation).
// Writes the checkpoint atomically to `checkpoint_out` and the NDJSON log to
// `log_path` (when not empty).
StageResult run_stage(const StageConfig& cfg, const model::ModelConfig& model_cfg, const TrainSet& data,
                      const std::filesystem::path& checkpoint_out, const std::filesystem::path& log_path,
                      const LossWeights& weights = {}, const track::TrackerConfig& tracker = {});

// Throws MissingPredecessor / StageOrderViolation if `checkpoint` cannot seed `stage`.
void check_predecessor(Stage stage, const std::optional<std::filesystem::path>& checkpoint);

}  // namespace depthvis::train
