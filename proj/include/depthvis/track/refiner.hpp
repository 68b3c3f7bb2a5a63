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

#include "depthvis/model/model.hpp"
#include "depthvis/track/tracker.hpp"

namespace depthvis::track {

// Temporal self-attention over one track's present frames, [T,E] -> [T,E]:
//   refined_t = e_t + Wo (sum_s a_ts Wv e_s - Wv e_t),  a_t = softmax_s((Wq e_t).(Wk e_s) / sqrt(E)).
// A single frame is returned unchanged.
nn::Var refine_trajectory(const nn::Var& embeddings, const model::RefinerWeights& w);

// Decodes a track query against one frame with the segmenter heads.
using DecodeFn = std::function<model::VisModel::Decoded(const nn::Var& query, const nn::Var& pixel_features)>;

// Refines every track of `tracking` and re-decodes its masks, classes and
// score. Track ids and absent frames are preserved.
std::vector<core::InstanceTrack> refine_tracks(const std::vector<FrameQueries>& frames,
                                               const TrackingResult& tracking, const model::RefinerWeights& w,
                                               const DecodeFn& decode, int height, int width);

}  // namespace depthvis::track
