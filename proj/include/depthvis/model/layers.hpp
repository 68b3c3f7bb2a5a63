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

#include <string>

#include "depthvis/nn/ops.hpp"
#include "depthvis/nn/parameters.hpp"

namespace depthvis::model {

using nn::Var;

struct Conv2d {
  Var w;
  Var b;
  int stride = 1;
  int pad = 0;

  Var operator()(const Var& x) const { return nn::conv2d(x, w, b, stride, pad); }
};

Conv2d make_conv(nn::ParameterSet& ps, const std::string& name, int in, int out, int kernel,
                 int stride, nn::InitSpec init = {});

struct Linear {
  Var w;
  Var b;

  Var operator()(const Var& x) const { return nn::linear(x, w, b); }
};

Linear make_linear(nn::ParameterSet& ps, const std::string& name, int in, int out,
                   nn::InitSpec init = {nn::InitKind::kXavier, 1.0});

struct LayerNorm {
  Var gamma;
  Var beta;

  Var operator()(const Var& x) const { return nn::layer_norm(x, gamma, beta); }
};

LayerNorm make_layer_norm(nn::ParameterSet& ps, const std::string& name, int dim);

// Hidden layers use ReLU; the last layer is linear.
struct Mlp {
  std::vector<Linear> layers;

  Var operator()(const Var& x) const;
};

Mlp make_mlp(nn::ParameterSet& ps, const std::string& name, int in, int hidden, int out,
             int num_layers);

// Single-head scaled dot-product attention with separate projections.
struct Attention {
  Linear q;
  Linear k;
  Linear v;
  Linear o;

  // query: [N,E]; key_in: [M,E]; value_in: [M,E].
  Var operator()(const Var& query, const Var& key_in, const Var& value_in) const;
};

Attention make_attention(nn::ParameterSet& ps, const std::string& name, int dim);

// Fixed 2-D sine/cosine position code, [h*w, dim]; dim must be even.
nn::Tensor sine_position_2d(int h, int w, int dim);

}  // namespace depthvis::model
