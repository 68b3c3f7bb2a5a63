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

#include <functional>
#include <vector>

#include "depthvis/nn/autograd.hpp"

namespace depthvis::nn {

Var constant(Tensor t);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var relu(const Var& a);
Var gelu(const Var& a);

// x: [B,C,H,W], w: [O,C,k,k], b: [O] (may be undefined).
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);
Var upsample_bilinear(const Var& x, int out_h, int out_w);
Var avg_pool2(const Var& x);
Var concat_channels(const std::vector<Var>& xs);

// x: [M,K], w: [O,K], b: [O] (may be undefined) -> [M,O].
Var linear(const Var& x, const Var& w, const Var& b);
// [M,K] x [K,N]
Var matmul(const Var& a, const Var& b);
// [M,K] x [N,K]^T
Var matmul_nt(const Var& a, const Var& b);
Var transpose(const Var& a);
Var softmax_rows(const Var& a);
Var layer_norm(const Var& x, const Var& gamma, const Var& beta);
Var l2_normalize_rows(const Var& x);

Var reshape(const Var& a, std::vector<int> shape);
// Concatenates / slices along the leading dimension.
Var concat_dim0(const std::vector<Var>& xs);
Var slice_dim0(const Var& a, int begin, int end);

// [B,C,H,W] -> [H*W, C] for batch item b.
Var image_tokens(const Var& x, int b);
// [H*W, C] -> [1,C,H,W]
Var tokens_to_image(const Var& t, int h, int w);

Var sum_all(const Var& a);
Var mean_all(const Var& a);
Var weighted_sum(const std::vector<Var>& scalars, const std::vector<double>& weights);

// Generic op with a caller-provided gradient: `grad_fn(grad_out, grads)` must
// accumulate into grads[i] (already sized like inputs[i]) for each input.
Var custom_op(const std::vector<Var>& inputs, Tensor value,
              std::function<void(const Tensor& grad_out, std::vector<Tensor*>& grads)> grad_fn);

}  // namespace depthvis::nn
