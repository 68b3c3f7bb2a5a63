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

#include "depthvis/nn/parameters.hpp"

#include <cmath>
#include <random>

#include "depthvis/core/error.hpp"

namespace depthvis::nn {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t name_hash(const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

Tensor init_tensor(const std::vector<int>& shape, InitSpec init, std::uint64_t stream) {
  Tensor t(shape, 0.0);
  std::mt19937_64 rng(stream);
  // Fan-in is everything but the leading (output) axis.
  const double fan_in = shape.size() > 1 ? static_cast<double>(t.numel()) / shape[0] : 1.0;
  const double fan_out = shape.empty() ? 1.0 : static_cast<double>(shape[0]);
  switch (init.kind) {
    case InitKind::kZeros:
      break;
    case InitKind::kOnes:
      t.fill(init.scale);
      break;
    case InitKind::kIdentity: {
      if (shape.size() != 2 || shape[0] != shape[1]) {
        throw Error(ErrorKind::kShapeMismatch, "identity init needs a square matrix");
      }
      for (int i = 0; i < shape[0]; ++i) t.at(i, i) = init.scale;
      break;
    }
    case InitKind::kHe:
    case InitKind::kXavier:
    case InitKind::kNormal: {
      double std = init.scale;
      if (init.kind == InitKind::kHe) std = init.scale * std::sqrt(2.0 / fan_in);
      if (init.kind == InitKind::kXavier) std = init.scale * std::sqrt(2.0 / (fan_in + fan_out));
      std::normal_distribution<double> dist(0.0, std);
      for (auto& v : t.values()) v = dist(rng);
      break;
    }
  }
  round_to_float(t);
  return t;
}

}  // namespace

Var ParameterSet::add(const std::string& name, std::vector<int> shape, InitSpec init) {
  const std::uint64_t stream = splitmix64(seed_ ^ name_hash(name));
  return add_tensor(name, init_tensor(shape, init, stream));
}

Var ParameterSet::add_tensor(const std::string& name, Tensor value) {
  if (contains(name)) throw Error(ErrorKind::kConfigError, "duplicate parameter " + name);
  round_to_float(value);
  Var v(std::move(value), true);
  index_[name] = params_.size();
  params_.push_back({name, v, false});
  return v;
}

Var ParameterSet::get(const std::string& name) const { return entry(name).var; }

Parameter& ParameterSet::entry(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error(ErrorKind::kConfigError, "unknown parameter " + name);
  return params_[it->second];
}

const Parameter& ParameterSet::entry(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error(ErrorKind::kConfigError, "unknown parameter " + name);
  return params_[it->second];
}

void ParameterSet::set_frozen(const std::string& prefix, bool frozen) {
  for (auto& p : params_) {
    if (p.name.rfind(prefix, 0) == 0) {
      p.frozen = frozen;
      p.var.set_requires_grad(!frozen);
    }
  }
}

void ParameterSet::freeze_all_except(const std::vector<std::string>& trainable_prefixes) {
  for (auto& p : params_) {
    bool trainable = false;
    for (const auto& prefix : trainable_prefixes) {
      if (p.name.rfind(prefix, 0) == 0) trainable = true;
    }
    p.frozen = !trainable;
    p.var.set_requires_grad(trainable);
  }
}

std::size_t ParameterSet::total_size() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.var.value().numel();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.var.zero_grad();
}

void AdamW::step(ParameterSet& params) {
  ++steps_;
  double scale = 1.0;
  if (cfg_.clip_norm > 0.0) {
    double sq = 0.0;
    for (auto& p : params.entries()) {
      if (p.frozen || p.var.grad().empty()) continue;
      for (double g : p.var.grad().values()) sq += g * g;
    }
    const double norm = std::sqrt(sq);
    if (norm > cfg_.clip_norm) scale = cfg_.clip_norm / norm;
  }
  const double bc1 = 1.0 - std::pow(cfg_.beta1, steps_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, steps_);
  for (auto& p : params.entries()) {
    if (p.frozen) continue;
    const Tensor& grad = p.var.grad();
    if (grad.empty()) continue;
    Tensor& value = p.var.mutable_value();
    auto& st = state_[p.name];
    if (st.m.numel() != value.numel()) {
      st.m = Tensor(value.shape(), 0.0);
      st.v = Tensor(value.shape(), 0.0);
    }
    // Biases and normalisation gains (rank 1) are not decayed.
    const double decay = value.rank() >= 2 ? cfg_.lr * cfg_.weight_decay : 0.0;
    for (std::size_t i = 0; i < value.numel(); ++i) {
      const double g = grad[i] * scale;
      st.m[i] = cfg_.beta1 * st.m[i] + (1.0 - cfg_.beta1) * g;
      st.v[i] = cfg_.beta2 * st.v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = st.m[i] / bc1;
      const double vhat = st.v[i] / bc2;
      value[i] -= decay * value[i];
      value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
    round_to_float(value);
  }
}

}  // namespace depthvis::nn
