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

#include "depthvis/harness/inference.hpp"

#include "depthvis/nn/autograd.hpp"
#include "depthvis/track/refiner.hpp"
#include "depthvis/train/stages.hpp"

namespace depthvis::harness {

std::vector<core::InstanceTrack> predict_tracks(const model::VisModel& m, const train::TrainSet& data, int video,
                                                bool offline, const track::TrackerConfig& tracker) {
  nn::NoGradGuard no_grad;
  const auto frames = train::segment_video(m, data, video);
  const auto& v = data.videos.at(video);
  const auto tracking = track::track_video(frames, m.tracker_projection().value(), v.height, v.width, tracker);
  if (!offline) return tracking.tracks;
  const track::DecodeFn decode = [&m](const nn::Var& q, const nn::Var& pix) { return m.decode_heads(q, pix); };
  return track::refine_tracks(frames, tracking, m.refiner_weights(), decode, v.height, v.width);
}

std::vector<eval::IdTrack> ground_truth_id_tracks(const core::Dataset& gt, int video_id) {
  std::vector<eval::IdTrack> out;
  for (const auto& a : gt.annotations) {
    if (a.video_id == video_id) out.push_back({a.instance_id, core::decode_segmentations(a.segmentations)});
  }
  return out;
}

EvalRun evaluate_model(const model::VisModel& m, const train::TrainSet& data, bool offline,
                       const track::TrackerConfig& tracker, const eval::EvalOptions& options) {
  EvalRun run;
  std::vector<eval::EvalPrediction> preds;
  int switches = 0;
  for (std::size_t vi = 0; vi < data.videos.size(); ++vi) {
    const int video_id = data.videos[vi].video_id;
    const auto tracks = predict_tracks(m, data, static_cast<int>(vi), offline, tracker);
    std::vector<eval::IdTrack> id_tracks;
    for (const auto& t : tracks) {
      preds.push_back({video_id, t.category_id, t.score, t.masks});
      id_tracks.push_back({t.track_id, t.masks});
      run.predictions.push_back(core::track_to_prediction(video_id, t));
    }
    switches += eval::id_switch_count(id_tracks, ground_truth_id_tracks(data.annotations, video_id));
  }
  run.report = eval::evaluate_ap(preds, data.annotations, options);
  run.report.id_switches = switches;
  return run;
}

}  // namespace depthvis::harness
