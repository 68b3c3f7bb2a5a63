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

#include <map>
#include <vector>

#include "json.hpp"

#include "depthvis/core/annotations.hpp"

namespace depthvis::eval {

// All values on the 0..100 scale.
struct MetricsReport {
  double ap = 0.0;
  double ap50 = 0.0;
  double ap75 = 0.0;
  double ar1 = 0.0;
  double ar10 = 0.0;
  std::map<int, double> per_category_ap;  // categories with ground truth only
  int id_switches = 0;
};

struct EvalPrediction {
  int video_id = 0;
  int category_id = 0;
  double score = 0.0;
  core::MaskTrack masks;
};

struct EvalOptions {
  std::vector<double> iou_thresholds;  // empty -> 0.50:0.05:0.95
  int max_dets = 100;
};

std::vector<double> default_iou_thresholds();

// Video-level AP/AR with tube IoU, greedy highest-score-first matching and
// 101-point interpolated precision. Ties in score keep input order.
// Throws UnknownCategory for predictions outside the ground-truth vocabulary.
MetricsReport evaluate_ap(const std::vector<EvalPrediction>& predictions, const core::Dataset& gt,
                          const EvalOptions& options = {});

struct IdTrack {
  int id = 0;
  core::MaskTrack masks;
};

// For each ground-truth track and frame, the predicted id with the highest mask
// IoU (>= 0.5) is its match; a change of matched id counts as one switch.
int id_switch_count(const std::vector<IdTrack>& predicted, const std::vector<IdTrack>& ground_truth,
                    double min_iou = 0.5);

nlohmann::json to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const nlohmann::json& j);

}  // namespace depthvis::eval
