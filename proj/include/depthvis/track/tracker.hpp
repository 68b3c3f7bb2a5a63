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

#include <utility>
#include <vector>

#include "depthvis/core/annotations.hpp"
#include "depthvis/model/model.hpp"
#include "depthvis/nn/tensor.hpp"

namespace depthvis::track {

using nn::Tensor;

struct TrackerConfig {
  double tau = 0.3;       // minimum cosine similarity for a match
  double momentum = 0.8;  // EMA weight of the stored embedding
  int lost_after = 5;
  int retire_after = 20;
  double no_object_threshold = 0.5;

  bool operator==(const TrackerConfig&) const = default;
};

enum class EntryState { kActive, kLost, kRetired };

struct MemoryEntry {
  int track_id = 0;
  std::vector<double> embedding;
  std::vector<double> class_hist;
  int age = 0;
  EntryState state = EntryState::kActive;
};

struct TrackMemory {
  std::vector<MemoryEntry> entries;
  int next_id = 1;
  int dim = 0;  // 0 until the first entry is created
};

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (memory index, query index)
  std::vector<int> spawned;                // query indices given fresh ids
  std::vector<int> unmatched_memory;       // memory indices that aged
  std::vector<int> track_ids;              // per query
};

// Matches queries [K,E] (rows are tracked embeddings) to non-retired memory
// entries by maximum total cosine similarity; weak pairs spawn new tracks.
// class_probs [K,C] (may be empty) feeds the per-track class histogram.
// Throws DimensionMismatch.
Assignment associate_frame(TrackMemory& memory, const Tensor& embeddings, const Tensor& class_probs,
                           const TrackerConfig& cfg = {});

// Segmenter output for one frame, detached from the autograd graph.
struct FrameQueries {
  Tensor class_logits;    // [N, C+1]
  Tensor query_embed;     // [N, E]
  Tensor mask_logits;     // [N, h*w]
  Tensor pixel_features;  // [h*w, E]
  int mask_h = 0;
  int mask_w = 0;
};

FrameQueries detach(const model::FrameOutput& out);

struct TrackingResult {
  std::vector<core::InstanceTrack> tracks;
  // query_index[k][t] is the query of track k in frame t, or -1.
  std::vector<std::vector<int>> query_index;
};

// Online tracking over a whole video; masks are bilinearly upsampled to
// height x width and thresholded at logit 0. Throws EmptyVideo.
TrackingResult track_video(const std::vector<FrameQueries>& frames, const Tensor& projection, int height,
                           int width, const TrackerConfig& cfg = {});

// Row-wise softmax of raw logits.
Tensor softmax(const Tensor& logits);

// Upsampled, thresholded mask for query `row`; nullopt when empty.
std::optional<core::BinaryMask> decode_mask(const Tensor& mask_logits, int row, int h, int w, int height,
                                            int width);

}  // namespace depthvis::track
