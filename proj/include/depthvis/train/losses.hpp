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
#include <optional>
#include <vector>

#include "depthvis/core/mask.hpp"
#include "depthvis/nn/autograd.hpp"
#include "depthvis/train/hungarian.hpp"

namespace depthvis::train {

using nn::Tensor;
using nn::Var;

struct LossWeights {
  double cls = 2.0;
  double mask_bce = 5.0;
  double mask_dice = 5.0;
  double depth = 1.0;
  // Relative weight of the "no object" class in the classification loss.
  double no_object = 0.1;
};

// One ground-truth instance visible in a frame.
struct GtInstance {
  int instance_id = 0;
  int class_index = 0;  // 0-based category index
  core::BinaryMask mask;
};

// Smoothed Dice coefficient (2*sum(s*y) + 1) / (sum(s) + sum(y) + 1) on sigmoid
// probabilities s.
double soft_dice(const double* logits, const core::BinaryMask& gt);
// Mean binary cross-entropy with logits over all pixels.
double mean_bce(const double* logits, const core::BinaryMask& gt);

// Resizes mask logits [N, h*w] to the ground-truth resolution [N, H*W].
Var upsample_mask_logits(const Var& mask_logits, int h, int w, int height, int width);

// cost(i, j) = cls*(-log p_i(c_j)) + bce*BCE(m_i, g_j) + dice*(1 - Dice(m_i, g_j)),
// with mask logits already at ground-truth resolution.
Tensor matching_cost(const Tensor& class_logits, const Tensor& mask_logits,
                     const std::vector<GtInstance>& gt, const LossWeights& w = {});

struct SegLoss {
  Var total;
  Var cls;
  Var bce;
  Var dice;
};

// Matched queries get class + mask terms; every other query is pushed to the
// "no object" class.
SegLoss segmentation_loss(const Var& class_logits, const Var& mask_logits,
                          const std::vector<GtInstance>& gt, const Matching& assignment,
                          const LossWeights& w = {});

// Weighted cross-entropy: sum_i w_i * CE_i / sum_i w_i.
Var weighted_cross_entropy(const Var& logits, const std::vector<int>& targets,
                           const std::vector<double>& weights);

// Mean over `pairs` of BCE / (1 - Dice) between logits rows and ground-truth masks.
Var mask_bce_loss(const Var& mask_logits, const std::vector<std::pair<int, const core::BinaryMask*>>& pairs);
Var mask_dice_loss(const Var& mask_logits, const std::vector<std::pair<int, const core::BinaryMask*>>& pairs);

struct SsiAlignment {
  double scale = 1.0;
  double shift = 0.0;
  bool shift_only = false;
  std::size_t pixels = 0;
};

// Least-squares scale and shift of pred onto target over selected pixels.
SsiAlignment ssi_align(const double* pred, const double* target, const std::uint8_t* mask, std::size_t n);

// Scale-and-shift-invariant L1: mean |a*pred + b - target| under the least-squares
// (a, b). Throws InsufficientPixels when fewer than 2 pixels are selected.
Var depth_loss_ssi(const Var& pred, const std::vector<double>& target,
                   const std::vector<std::uint8_t>* mask = nullptr);

// Clip-level InfoNCE over embeddings [M,E] (assumed L2-normalised): for each
// anchor, other-frame entries with the same label are positives and all
// other-frame entries are candidates.
Var contrastive_loss(const Var& embeddings, const std::vector<int>& frame_of,
                     const std::vector<int>& label, double temperature);

}  // namespace depthvis::train
