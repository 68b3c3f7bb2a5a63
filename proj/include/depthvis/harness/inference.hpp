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

#include <vector>

#include "depthvis/core/annotations.hpp"
#include "depthvis/eval/metrics.hpp"
#include "depthvis/model/model.hpp"
#include "depthvis/track/tracker.hpp"
#include "depthvis/train/data.hpp"

namespace depthvis::harness {

// Segment, associate and (offline) refine one video.
std::vector<core::InstanceTrack> predict_tracks(const model::VisModel& model, const train::TrainSet& data, int video,
                                                bool offline, const track::TrackerConfig& tracker = {});

struct EvalRun {
  eval::MetricsReport report;
  std::vector<core::Prediction> predictions;
};

// AP/AR over all videos of `data` plus id switches summed over videos.
EvalRun evaluate_model(const model::VisModel& model, const train::TrainSet& data, bool offline,
                       const track::TrackerConfig& tracker = {}, const eval::EvalOptions& options = {});

// Ground-truth instance tracks of one video as identity tracks.
std::vector<eval::IdTrack> ground_truth_id_tracks(const core::Dataset& gt, int video_id);

}  // namespace depthvis::harness
