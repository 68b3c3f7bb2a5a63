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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "depthvis/core/iou.hpp"
#include "depthvis/core/rle.hpp"

namespace depthvis::testing {

BruteAssignment brute_force_assignment(const std::vector<double>& c, int M, int N) {
  const bool rows_small = M <= N;
  const int k = std::min(M, N);
  const int n = std::max(M, N);
  std::vector<int> pick(n);
  std::iota(pick.begin(), pick.end(), 0);
  BruteAssignment best{std::numeric_limits<double>::infinity(), {}};
  do {
    std::vector<std::pair<int, int>> pairs;
    double cost = 0;
    for (int i = 0; i < k; ++i) {
      const int r = rows_small ? i : pick[i];
      const int col = rows_small ? pick[i] : i;
      pairs.emplace_back(r, col);
      cost += c[r * N + col];
    }
    std::sort(pairs.begin(), pairs.end());
    if (cost < best.cost || (cost == best.cost && pairs < best.pairs)) best = {cost, pairs};
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

void for_each_matrix(int rows, int cols, int levels, const std::function<void(const std::vector<double>&)>& visit) {
  const int cells = rows * cols;
  std::vector<double> c(cells, 0.0);
  std::vector<int> digit(cells, 0);
  while (true) {
    for (int i = 0; i < cells; ++i) c[i] = digit[i];
    visit(c);
    int k = 0;
    while (k < cells && ++digit[k] == levels) digit[k++] = 0;
    if (k == cells) break;
  }
}

int exhaustive_levels(int rows, int cols) {
  const int cells = rows * cols;
  if (cells <= 9) return 5;
  if (cells == 12 && (rows == 2 || cols == 2)) return 5;
  return cells >= 16 ? 2 : 3;
}

double brute_tube_iou(const core::MaskTrack& a, const core::MaskTrack& b) {
  double inter = 0;
  double uni = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const core::BinaryMask* ma = a[t] ? &*a[t] : nullptr;
    const core::BinaryMask* mb = b[t] ? &*b[t] : nullptr;
    const core::BinaryMask* shape = ma ? ma : mb;
    if (!shape) continue;
    for (int y = 0; y < shape->height(); ++y) {
      for (int x = 0; x < shape->width(); ++x) {
        const int pa = ma ? ma->at(y, x) : 0;
        const int pb = mb ? mb->at(y, x) : 0;
        inter += pa && pb;
        uni += pa || pb;
      }
    }
  }
  return uni > 0 ? inter / uni : 0.0;
}

std::vector<int> expand_runs(const std::vector<uint32_t>& counts) {
  std::vector<int> out;
  int v = 0;
  for (auto c : counts) {
    out.insert(out.end(), c, v);
    v = 1 - v;
  }
  return out;
}

double ssi_l1(const std::vector<double>& p, const std::vector<double>& t) {
  const double n = static_cast<double>(p.size());
  double sp = 0, st = 0, spp = 0, spt = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    sp += p[i];
    st += t[i];
    spp += p[i] * p[i];
    spt += p[i] * t[i];
  }
  const double det = n * spp - sp * sp;
  const double a = (n * spt - sp * st) / det;
  const double b = (st - a * sp) / n;
  double l = 0;
  for (std::size_t i = 0; i < p.size(); ++i) l += std::abs(a * p[i] + b - t[i]);
  return l / n;
}

nn::Tensor random_tensor(std::mt19937_64& rng, std::vector<int> shape, double sd) {
  std::normal_distribution<double> g(0.0, sd);
  nn::Tensor t(shape);
  for (auto& v : t.values()) v = g(rng);
  return t;
}

core::BinaryMask random_mask(std::mt19937_64& rng, int h, int w, double p) {
  std::bernoulli_distribution bit(p);
  core::BinaryMask m(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(y, x, bit(rng));
  }
  return m;
}

core::MaskTrack random_track(std::mt19937_64& rng, int frames, int h, int w) {
  core::MaskTrack m;
  for (int t = 0; t < frames; ++t) {
    if (rng() % 5 == 0) {
      m.push_back(std::nullopt);
      continue;
    }
    core::BinaryMask b(h, w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) b.set(y, x, rng() % 2);
    }
    m.push_back(b);
  }
  return m;
}

std::vector<FdEntry> finite_difference(const nn::Tensor& x, const std::function<nn::Var(const nn::Var&)>& loss,
                                       double eps) {
  nn::Var v(x, true);
  nn::backward(loss(v));
  const nn::Tensor g = v.grad();
  std::vector<FdEntry> out;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    nn::Tensor xp = x;
    nn::Tensor xm = x;
    xp[i] += eps;
    xm[i] -= eps;
    nn::NoGradGuard guard;
    const double num = (loss(nn::Var(xp)).value()[0] - loss(nn::Var(xm)).value()[0]) / (2 * eps);
    const double rel = std::abs(num - g[i]) / std::max({std::abs(num), std::abs(g[i]), 1e-4});
    out.push_back({i, num, g[i], rel});
  }
  return out;
}

double max_rel_error(const std::vector<FdEntry>& entries) {
  double worst = 0;
  for (const auto& e : entries) worst = std::max(worst, e.rel_error);
  return worst;
}

core::Dataset make_gt(const std::vector<std::tuple<int, int, core::MaskTrack>>& items, int videos, int cats,
                      int frames, int h, int w) {
  core::Dataset ds;
  for (int v = 1; v <= videos; ++v) ds.videos.push_back({v, w, h, frames, {}});
  for (int c = 1; c <= cats; ++c) ds.categories.push_back({c, "c" + std::to_string(c)});
  int id = 1;
  for (const auto& [video, cat, masks] : items) {
    core::VideoAnnotation a;
    a.id = id;
    a.video_id = video;
    a.category_id = cat;
    a.instance_id = id++;
    a.segmentations = core::encode_segmentations(masks);
    ds.annotations.push_back(a);
  }
  return ds;
}

ReferenceMetrics reference_evaluate(const std::vector<eval::EvalPrediction>& preds, const core::Dataset& gt) {
  std::vector<double> thr;
  for (int i = 0; i < 10; ++i) thr.push_back((50 + 5 * i) / 100.0);
  ReferenceMetrics out;
  int cats = 0;
  for (const auto& cat : gt.categories) {
    std::vector<const core::VideoAnnotation*> gts;
    for (const auto& a : gt.annotations) {
      if (a.category_id == cat.id) gts.push_back(&a);
    }
    if (gts.empty()) continue;
    ++cats;
    const double n_gt = static_cast<double>(gts.size());
    auto run = [&](double t, int max_per_video) {
      std::vector<std::size_t> order;
      for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i].category_id == cat.id) order.push_back(i);
      }
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });
      std::map<int, int> used_per_video;
      std::vector<std::size_t> kept;
      for (std::size_t i : order) {
        if (used_per_video[preds[i].video_id]++ < max_per_video) kept.push_back(i);
      }
      std::vector<bool> taken(gts.size(), false);
      std::vector<int> tp;
      for (std::size_t i : kept) {
        int best = -1;
        double best_iou = -1;
        for (std::size_t g = 0; g < gts.size(); ++g) {
          if (taken[g] || gts[g]->video_id != preds[i].video_id) continue;
          const double iou = brute_tube_iou(preds[i].masks, core::decode_segmentations(gts[g]->segmentations));
          if (iou >= t && iou > best_iou) {
            best = static_cast<int>(g);
            best_iou = iou;
          }
        }
        if (best >= 0) taken[best] = true;
        tp.push_back(best >= 0);
      }
      double ap = 0;
      for (int r = 0; r <= 100; ++r) {
        double p_best = 0;
        int cum = 0;
        for (std::size_t k = 0; k < tp.size(); ++k) {
          cum += tp[k];
          if (cum / n_gt >= r / 100.0 - 1e-12) p_best = std::max(p_best, cum / static_cast<double>(k + 1));
        }
        ap += p_best;
      }
      const double recall = std::accumulate(tp.begin(), tp.end(), 0) / n_gt;
      return std::pair<double, double>(ap / 101.0, recall);
    };
    double ap = 0;
    double ar1 = 0;
    double ar10 = 0;
    for (double t : thr) {
      ap += run(t, 100).first;
      ar1 += run(t, 1).second;
      ar10 += run(t, 10).second;
    }
    out.ap += ap / 10;
    out.ap50 += run(0.5, 100).first;
    out.ap75 += run(0.75, 100).first;
    out.ar1 += ar1 / 10;
    out.ar10 += ar10 / 10;
  }
  if (cats > 0) {
    for (double* v : {&out.ap, &out.ap50, &out.ap75, &out.ar1, &out.ar10}) *v = 100 * *v / cats;
  }
  return out;
}

}  // namespace depthvis::testing
