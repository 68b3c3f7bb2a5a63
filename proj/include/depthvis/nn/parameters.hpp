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
#include <map>
#include <string>
#include <vector>

#include "depthvis/nn/autograd.hpp"

namespace depthvis::nn {

enum class InitKind { kZeros, kOnes, kHe, kXavier, kNormal, kIdentity };

struct InitSpec {
  InitKind kind = InitKind::kHe;
  double scale = 1.0;  // std for kNormal, gain otherwise
};

struct Parameter {
  std::string name;
  Var var;
  bool frozen = false;
};

// Named trainable tensors. Each parameter draws its initial values from a
// generator keyed by (seed, name), so adding a parameter never perturbs the
// initialisation of the others.
class ParameterSet {
 public:
  explicit ParameterSet(std::uint64_t seed = 0) : seed_(seed) {}

  Var add(const std::string& name, std::vector<int> shape, InitSpec init);
  // Registers a parameter with explicit values.
  Var add_tensor(const std::string& name, Tensor value);

  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  Var get(const std::string& name) const;
  Parameter& entry(const std::string& name);
  const Parameter& entry(const std::string& name) const;

  // Freezes (or unfreezes) every parameter whose name starts with `prefix`.
  void set_frozen(const std::string& prefix, bool frozen);
  void freeze_all_except(const std::vector<std::string>& trainable_prefixes);

  std::vector<Parameter>& entries() { return params_; }
  const std::vector<Parameter>& entries() const { return params_; }
  std::size_t total_size() const;
  void zero_grad();
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

std::uint64_t name_hash(const std::string& name);
std::uint64_t splitmix64(std::uint64_t x);

struct AdamWConfig {
  double lr = 1.0e-4;
  double weight_decay = 5.0e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 0.0;  // global gradient-norm clip; 0 disables
};

// Adam with decoupled weight decay. Frozen parameters are skipped entirely and
// updated values are rounded to float precision so f32 checkpoints are exact.
class AdamW {
 public:
  explicit AdamW(AdamWConfig cfg) : cfg_(cfg) {}

  void step(ParameterSet& params);
  void set_lr(double lr) { cfg_.lr = lr; }
  const AdamWConfig& config() const { return cfg_; }
  int steps() const { return steps_; }

 private:
  struct Moments {
    Tensor m;
    Tensor v;
  };
  AdamWConfig cfg_;
  int steps_ = 0;
  std::map<std::string, Moments> state_;
};

}  // namespace depthvis::nn
