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

#include "depthvis/train/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "depthvis/core/error.hpp"

namespace depthvis::train {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest-augmenting-path Hungarian algorithm with potentials for n <= m.
// Returns row_to_col.
std::vector<int> solve_rows_le_cols(const std::vector<double>& a, int n, int m, double* total) {
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0);
  std::vector<int> way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a[static_cast<std::size_t>(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  double sum = 0.0;
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) {
      row_to_col[p[j] - 1] = j - 1;
      sum += a[static_cast<std::size_t>(p[j] - 1) * m + (j - 1)];
    }
  }
  if (total) *total = sum;
  return row_to_col;
}

}  // namespace

double assignment_optimum(const std::vector<double>& cost, int rows, int cols) {
  if (rows == 0 || cols == 0) return 0.0;
  double total = 0.0;
  if (rows <= cols) {
    solve_rows_le_cols(cost, rows, cols, &total);
  } else {
    std::vector<double> t(cost.size());
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) t[static_cast<std::size_t>(c) * rows + r] = cost[static_cast<std::size_t>(r) * cols + c];
    }
    solve_rows_le_cols(t, cols, rows, &total);
  }
  return total;
}

Matching hungarian_match(const nn::Tensor& cost) {
  if (cost.rank() != 2) throw Error(ErrorKind::kShapeMismatch, "cost matrix must be 2-D");
  const int M = cost.dim(0);
  const int N = cost.dim(1);
  for (double c : cost.values()) {
    if (!std::isfinite(c)) throw Error(ErrorKind::kNonFiniteCost, "cost matrix has a non-finite entry");
  }
  Matching out;
  if (M == 0 || N == 0) return out;
  const std::vector<double>& a = cost.values();
  const double optimum = assignment_optimum(a, M, N);
  const double tol = 1e-9 * std::max(1.0, std::abs(optimum));

  // Fix rows in order, each to the smallest column that still admits an optimal
  // completion of the remaining sub-problem.
  std::vector<char> col_used(N, 0);
  double fixed_cost = 0.0;
  int matched = 0;
  const int target = std::min(M, N);
  for (int r = 0; r < M && matched < target; ++r) {
    const int rest_rows = M - r - 1;
    for (int c = 0; c < N; ++c) {
      if (col_used[c]) continue;
      std::vector<int> cols;
      for (int j = 0; j < N; ++j) {
        if (!col_used[j] && j != c) cols.push_back(j);
      }
      const int need = target - matched - 1;
      if (std::min<int>(rest_rows, static_cast<int>(cols.size())) < need) continue;
      double rest = 0.0;
      if (need > 0) {
        std::vector<double> sub(static_cast<std::size_t>(rest_rows) * cols.size());
        for (int i = 0; i < rest_rows; ++i) {
          for (std::size_t j = 0; j < cols.size(); ++j) {
            sub[i * cols.size() + j] = a[static_cast<std::size_t>(r + 1 + i) * N + cols[j]];
          }
        }
        rest = assignment_optimum(sub, rest_rows, static_cast<int>(cols.size()));
      }
      const double total = fixed_cost + a[static_cast<std::size_t>(r) * N + c] + rest;
      if (total <= optimum + tol) {
        out.pairs.emplace_back(r, c);
        col_used[c] = 1;
        fixed_cost += a[static_cast<std::size_t>(r) * N + c];
        ++matched;
        break;
      }
    }
  }
  out.cost = fixed_cost;
  return out;
}

}  // namespace depthvis::train
