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

#include "depthvis/model/layers.hpp"

#include <cmath>

namespace depthvis::model {

Conv2d make_conv(nn::ParameterSet& ps, const std::string& name, int in, int out, int kernel,
                 int stride, nn::InitSpec init) {
  Conv2d c;
  c.w = ps.add(name + ".w", {out, in, kernel, kernel}, init);
  c.b = ps.add(name + ".b", {out}, {nn::InitKind::kZeros});
  c.stride = stride;
  c.pad = kernel / 2;
  return c;
}

Linear make_linear(nn::ParameterSet& ps, const std::string& name, int in, int out,
                   nn::InitSpec init) {
  return {ps.add(name + ".w", {out, in}, init), ps.add(name + ".b", {out}, {nn::InitKind::kZeros})};
}

LayerNorm make_layer_norm(nn::ParameterSet& ps, const std::string& name, int dim) {
  return {ps.add(name + ".gamma", {dim}, {nn::InitKind::kOnes}),
          ps.add(name + ".beta", {dim}, {nn::InitKind::kZeros})};
}

Var Mlp::operator()(const Var& x) const {
  Var h = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    h = layers[i](h);
    if (i + 1 < layers.size()) h = nn::relu(h);
  }
  return h;
}

Mlp make_mlp(nn::ParameterSet& ps, const std::string& name, int in, int hidden, int out,
             int num_layers) {
  Mlp m;
  for (int i = 0; i < num_layers; ++i) {
    const int a = i == 0 ? in : hidden;
    const int b = i + 1 == num_layers ? out : hidden;
    m.layers.push_back(make_linear(ps, name + "." + std::to_string(i), a, b,
                                   {nn::InitKind::kHe, 1.0}));
  }
  return m;
}

Var Attention::operator()(const Var& query, const Var& key_in, const Var& value_in) const {
  const Var qp = q(query);
  const Var kp = k(key_in);
  const Var vp = v(value_in);
  const double scale = 1.0 / std::sqrt(static_cast<double>(qp.dim(1)));
  const Var attn = nn::softmax_rows(nn::scale(nn::matmul_nt(qp, kp), scale));
  return o(nn::matmul(attn, vp));
}

Attention make_attention(nn::ParameterSet& ps, const std::string& name, int dim) {
  return {make_linear(ps, name + ".q", dim, dim), make_linear(ps, name + ".k", dim, dim),
          make_linear(ps, name + ".v", dim, dim), make_linear(ps, name + ".o", dim, dim)};
}

nn::Tensor sine_position_2d(int h, int w, int dim) {
  nn::Tensor pe({h * w, dim}, 0.0);
  constexpr double kPi = 3.141592653589793;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int p = y * w + x;
      // First half of the channels encodes y, second half x, as sin/cos pairs
      // of increasing frequency over the normalised coordinate.
      for (int i = 0; i < dim; ++i) {
        const bool is_y = i < dim / 2;
        const int j = is_y ? i : i - dim / 2;
        const double coord = is_y ? (y + 0.5) / h : (x + 0.5) / w;
        const double angle = kPi * coord * (j / 2 + 1);
        pe.at(p, i) = (j % 2 == 0) ? std::sin(angle) : std::cos(angle);
      }
    }
  }
  return pe;
}

}  // namespace depthvis::model
