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

#include "depthvis/track/tracker.hpp"

#include <cmath>

#include "depthvis/core/error.hpp"
#include "depthvis/nn/kernels.hpp"
#include "depthvis/train/hungarian.hpp"

namespace depthvis::track {

namespace {

double norm(const double* v, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += v[i] * v[i];
  return std::sqrt(s);
}

double cosine(const double* a, const double* b, int n) {
  const double na = norm(a, n);
  const double nb = norm(b, n);
  if (na == 0.0 || nb == 0.0) return 0.0;
  double d = 0.0;
  for (int i = 0; i < n; ++i) d += a[i] * b[i];
  return d / (na * nb);
}

}  // namespace

Tensor softmax(const Tensor& logits) {
  const int N = logits.dim(0);
  const int K = logits.dim(1);
  Tensor p({N, K});
  for (int i = 0; i < N; ++i) {
    double mx = logits.at(i, 0);
    for (int k = 1; k < K; ++k) mx = std::max(mx, logits.at(i, k));
    double s = 0.0;
    for (int k = 0; k < K; ++k) s += (p.at(i, k) = std::exp(logits.at(i, k) - mx));
    for (int k = 0; k < K; ++k) p.at(i, k) /= s;
  }
  return p;
}

Assignment associate_frame(TrackMemory& memory, const Tensor& embeddings, const Tensor& class_probs,
                           const TrackerConfig& cfg) {
  const int K = embeddings.rank() == 2 ? embeddings.dim(0) : 0;
  const int E = K > 0 ? embeddings.dim(1) : memory.dim;
  if (memory.dim != 0 && K > 0 && E != memory.dim) {
    throw Error(ErrorKind::kDimensionMismatch, "query embeddings have dimension " + std::to_string(E) +
                                                   ", memory has " + std::to_string(memory.dim));
  }
  Assignment out;
  out.track_ids.assign(K, -1);

  std::vector<int> eligible;
  for (std::size_t i = 0; i < memory.entries.size(); ++i) {
    if (memory.entries[i].state != EntryState::kRetired) eligible.push_back(static_cast<int>(i));
  }
  std::vector<char> query_matched(K, 0);
  std::vector<char> memory_matched(memory.entries.size(), 0);
  if (!eligible.empty() && K > 0) {
    Tensor sim({static_cast<int>(eligible.size()), K});
    Tensor cost({static_cast<int>(eligible.size()), K});
    for (std::size_t r = 0; r < eligible.size(); ++r) {
      const auto& m = memory.entries[eligible[r]].embedding;
      for (int q = 0; q < K; ++q) {
        sim.at(static_cast<int>(r), q) = cosine(m.data(), embeddings.data() + static_cast<std::size_t>(q) * E, E);
        cost.at(static_cast<int>(r), q) = -sim.at(static_cast<int>(r), q);
      }
    }
    const train::Matching match = train::hungarian_match(cost);
    for (const auto& [r, q] : match.pairs) {
      if (sim.at(r, q) < cfg.tau) continue;
      const int mi = eligible[r];
      out.pairs.emplace_back(mi, q);
      query_matched[q] = 1;
      memory_matched[mi] = 1;
    }
  }

  auto unit = [&](int q) {
    const double* e = embeddings.data() + static_cast<std::size_t>(q) * E;
    const double n = norm(e, E);
    std::vector<double> u(e, e + E);
    if (n > 0.0) {
      for (auto& v : u) v /= n;
    }
    return u;
  };
  auto add_hist = [&](MemoryEntry& entry, int q) {
    if (class_probs.empty()) return;
    const int C = class_probs.dim(1);
    if (entry.class_hist.empty()) entry.class_hist.assign(C, 0.0);
    for (int c = 0; c < C; ++c) entry.class_hist[c] += class_probs.at(q, c);
  };

  for (const auto& [mi, q] : out.pairs) {
    auto& entry = memory.entries[mi];
    const auto u = unit(q);
    for (int i = 0; i < E; ++i) entry.embedding[i] = cfg.momentum * entry.embedding[i] + (1.0 - cfg.momentum) * u[i];
    entry.age = 0;
    entry.state = EntryState::kActive;
    add_hist(entry, q);
    out.track_ids[q] = entry.track_id;
  }
  for (std::size_t i = 0; i < memory.entries.size(); ++i) {
    auto& entry = memory.entries[i];
    if (memory_matched[i] || entry.state == EntryState::kRetired) continue;
    ++entry.age;
    if (entry.age >= cfg.retire_after) {
      entry.state = EntryState::kRetired;
    } else if (entry.age >= cfg.lost_after) {
      entry.state = EntryState::kLost;
    }
    out.unmatched_memory.push_back(static_cast<int>(i));
  }
  for (int q = 0; q < K; ++q) {
    if (query_matched[q]) continue;
    MemoryEntry entry;
    entry.track_id = memory.next_id++;
    entry.embedding = unit(q);
    add_hist(entry, q);
    memory.entries.push_back(std::move(entry));
    out.spawned.push_back(q);
    out.track_ids[q] = memory.entries.back().track_id;
  }
  if (K > 0) memory.dim = E;
  return out;
}

FrameQueries detach(const model::FrameOutput& out) {
  return {out.class_logits.value(), out.query_embed.value(), out.mask_logits.value(), out.pixel_features.value(),
          out.mask_h, out.mask_w};
}

std::optional<core::BinaryMask> decode_mask(const Tensor& mask_logits, int row, int h, int w, int height,
                                            int width) {
  std::vector<double> up(static_cast<std::size_t>(height) * width, 0.0);
  nn::kernels::upsample_bilinear_forward(1, h, w, height, width,
                                         mask_logits.data() + static_cast<std::size_t>(row) * h * w, up.data());
  std::vector<uint8_t> bits(up.size());
  bool any = false;
  for (std::size_t i = 0; i < up.size(); ++i) {
    bits[i] = up[i] > 0.0 ? 1 : 0;
    any = any || bits[i];
  }
  if (!any) return std::nullopt;
  return core::BinaryMask(height, width, std::move(bits));
}

TrackingResult track_video(const std::vector<FrameQueries>& frames, const Tensor& projection, int height,
                           int width, const TrackerConfig& cfg) {
  if (frames.empty()) throw Error(ErrorKind::kEmptyVideo, "cannot track an empty video");
  const int T = static_cast<int>(frames.size());
  TrackMemory memory;
  TrackingResult result;
  std::vector<int> track_slot;  // track_id -> result index
  std::vector<double> score_sum;
  std::vector<int> score_count;
  std::vector<std::vector<double>> hist;

  for (int t = 0; t < T; ++t) {
    const FrameQueries& f = frames[t];
    const Tensor probs = softmax(f.class_logits);
    const int N = probs.dim(0);
    const int C = probs.dim(1) - 1;
    const int E = f.query_embed.dim(1);
    std::vector<int> kept;
    for (int q = 0; q < N; ++q) {
      if (probs.at(q, C) <= cfg.no_object_threshold) kept.push_back(q);
    }
    const int K = static_cast<int>(kept.size());
    Tensor raw({K, E});
    Tensor fg({K, C});
    for (int i = 0; i < K; ++i) {
      for (int e = 0; e < E; ++e) raw.at(i, e) = f.query_embed.at(kept[i], e);
      for (int c = 0; c < C; ++c) fg.at(i, c) = probs.at(kept[i], c);
    }
    Tensor z({K, projection.dim(0)}, 0.0);
    if (K > 0) nn::kernels::gemm_nt(K, projection.dim(0), E, raw.data(), projection.data(), z.data());
    const Assignment a = associate_frame(memory, z, fg, cfg);
    for (int i = 0; i < K; ++i) {
      const int id = a.track_ids[i];
      if (id >= static_cast<int>(track_slot.size())) track_slot.resize(id + 1, -1);
      if (track_slot[id] < 0) {
        track_slot[id] = static_cast<int>(result.tracks.size());
        core::InstanceTrack tr;
        tr.track_id = id;
        tr.masks.assign(T, std::nullopt);
        result.tracks.push_back(std::move(tr));
        result.query_index.emplace_back(T, -1);
        score_sum.push_back(0.0);
        score_count.push_back(0);
        hist.emplace_back(C, 0.0);
      }
      const int k = track_slot[id];
      const int q = kept[i];
      result.query_index[k][t] = q;
      result.tracks[k].masks[t] = decode_mask(f.mask_logits, q, f.mask_h, f.mask_w, height, width);
      double best = 0.0;
      for (int c = 0; c < C; ++c) {
        best = std::max(best, fg.at(i, c));
        hist[k][c] += fg.at(i, c);
      }
      score_sum[k] += best;
      ++score_count[k];
    }
  }
  for (std::size_t k = 0; k < result.tracks.size(); ++k) {
    auto& tr = result.tracks[k];
    tr.score = score_count[k] > 0 ? score_sum[k] / score_count[k] : 0.0;
    tr.category_id = static_cast<int>(std::max_element(hist[k].begin(), hist[k].end()) - hist[k].begin()) + 1;
  }
  return result;
}

}  // namespace depthvis::track
