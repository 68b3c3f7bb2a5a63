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

#include "depthvis/nn/tensor.hpp"

namespace depthvis::train {

struct Matching {
  std::vector<std::pair<int, int>> pairs;  // (row, col), sorted by row
  double cost = 0.0;
};

// Minimum-cost one-to-one assignment of size min(M, N) for an M x N matrix.
// Among optimal assignments the lexicographically smallest (row, col) sequence
// wins. Throws NonFiniteCost.
Matching hungarian_match(const nn::Tensor& cost);

// Plain Kuhn-Munkres optimum value without tie-breaking.
double assignment_optimum(const std::vector<double>& cost, int rows, int cols);

}  // namespace depthvis::train
