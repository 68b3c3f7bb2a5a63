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

#include "depthvis/track/refiner.hpp"

#include <cmath>

#include "depthvis/nn/ops.hpp"

namespace depthvis::track {

using nn::Var;

Var refine_trajectory(const Var& embeddings, const model::RefinerWeights& w) {
  const int T = embeddings.dim(0);
  if (T == 1) return embeddings;
  const double scale = 1.0 / std::sqrt(static_cast<double>(embeddings.dim(1)));
  const Var q = nn::linear(embeddings, w.wq, Var());
  const Var k = nn::linear(embeddings, w.wk, Var());
  const Var v = nn::linear(embeddings, w.wv, Var());
  const Var attn = nn::softmax_rows(nn::scale(nn::matmul_nt(q, k), scale));
  const Var delta = nn::sub(nn::matmul(attn, v), v);
  return nn::add(embeddings, nn::linear(delta, w.wo, Var()));
}

std::vector<core::InstanceTrack> refine_tracks(const std::vector<FrameQueries>& frames,
                                               const TrackingResult& tracking, const model::RefinerWeights& w,
                                               const DecodeFn& decode, int height, int width) {
  std::vector<core::InstanceTrack> out;
  const int T = static_cast<int>(frames.size());
  for (std::size_t k = 0; k < tracking.tracks.size(); ++k) {
    const auto& src = tracking.tracks[k];
    std::vector<int> present;
    for (int t = 0; t < T; ++t) {
      if (tracking.query_index[k][t] >= 0) present.push_back(t);
    }
    core::InstanceTrack tr;
    tr.track_id = src.track_id;
    tr.masks.assign(T, std::nullopt);
    if (present.empty()) {
      tr.category_id = src.category_id;
      tr.score = src.score;
      out.push_back(std::move(tr));
      continue;
    }
    const int E = frames[present[0]].query_embed.dim(1);
    nn::Tensor traj({static_cast<int>(present.size()), E});
    for (std::size_t i = 0; i < present.size(); ++i) {
      const int t = present[i];
      const int q = tracking.query_index[k][t];
      for (int e = 0; e < E; ++e) traj.at(static_cast<int>(i), e) = frames[t].query_embed.at(q, e);
    }
    const Var refined = refine_trajectory(nn::constant(std::move(traj)), w);
    std::vector<double> hist;
    double score = 0.0;
    for (std::size_t i = 0; i < present.size(); ++i) {
      const int t = present[i];
      const Var row = nn::slice_dim0(refined, static_cast<int>(i), static_cast<int>(i) + 1);
      const auto dec = decode(row, nn::constant(frames[t].pixel_features));
      const Tensor probs = softmax(dec.class_logits.value());
      const int C = probs.dim(1) - 1;
      if (hist.empty()) hist.assign(C, 0.0);
      double best = 0.0;
      for (int c = 0; c < C; ++c) {
        hist[c] += probs.at(0, c);
        best = std::max(best, probs.at(0, c));
      }
      score += best;
      tr.masks[t] = decode_mask(dec.mask_logits.value(), 0, frames[t].mask_h, frames[t].mask_w, height, width);
    }
    tr.score = score / static_cast<double>(present.size());
    tr.category_id = static_cast<int>(std::max_element(hist.begin(), hist.end()) - hist.begin()) + 1;
    out.push_back(std::move(tr));
  }
  return out;
}

}  // namespace depthvis::track
