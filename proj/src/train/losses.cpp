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

#include "depthvis/train/losses.hpp"

#include <algorithm>
#include <cmath>

#include "depthvis/core/error.hpp"
#include "depthvis/nn/ops.hpp"

namespace depthvis::train {

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

std::vector<double> log_softmax_row(const double* x, int n) {
  double mx = x[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, x[i]);
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::exp(x[i] - mx);
  const double lse = mx + std::log(s);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = x[i] - lse;
  return out;
}

}  // namespace

double mean_bce(const double* logits, const core::BinaryMask& gt) {
  const auto y = gt.data();
  double s = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) s += softplus(logits[k]) - y[k] * logits[k];
  return s / static_cast<double>(y.size());
}

double soft_dice(const double* logits, const core::BinaryMask& gt) {
  const auto y = gt.data();
  double inter = 0.0;
  double ssum = 0.0;
  double ysum = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double s = sigmoid(logits[k]);
    inter += s * y[k];
    ssum += s;
    ysum += y[k];
  }
  return (2.0 * inter + 1.0) / (ssum + ysum + 1.0);
}

Var upsample_mask_logits(const Var& mask_logits, int h, int w, int height, int width) {
  const int N = mask_logits.dim(0);
  const Var img = nn::reshape(mask_logits, {1, N, h, w});
  return nn::reshape(nn::upsample_bilinear(img, height, width), {N, height * width});
}

Tensor matching_cost(const Tensor& class_logits, const Tensor& mask_logits,
                     const std::vector<GtInstance>& gt, const LossWeights& w) {
  const int N = class_logits.dim(0);
  const int K = class_logits.dim(1);
  const int G = static_cast<int>(gt.size());
  if (mask_logits.rank() != 2 || mask_logits.dim(0) != N) {
    throw Error(ErrorKind::kShapeMismatch, "mask logits do not match the query count");
  }
  for (const auto& g : gt) {
    if (g.mask.size() != static_cast<std::size_t>(mask_logits.dim(1))) {
      throw Error(ErrorKind::kShapeMismatch, "ground-truth mask size differs from mask logits");
    }
    if (g.class_index < 0 || g.class_index >= K - 1) {
      throw Error(ErrorKind::kShapeMismatch, "ground-truth class out of range");
    }
  }
  Tensor cost({N, G}, 0.0);
  const std::size_t P = static_cast<std::size_t>(mask_logits.dim(1));
  for (int i = 0; i < N; ++i) {
    const auto logp = log_softmax_row(class_logits.data() + static_cast<std::size_t>(i) * K, K);
    const double* m = mask_logits.data() + i * P;
    for (int j = 0; j < G; ++j) {
      cost.at(i, j) = w.cls * (-logp[gt[j].class_index]) + w.mask_bce * mean_bce(m, gt[j].mask) +
                      w.mask_dice * (1.0 - soft_dice(m, gt[j].mask));
    }
  }
  return cost;
}

Var weighted_cross_entropy(const Var& logits, const std::vector<int>& targets,
                           const std::vector<double>& weights) {
  const int N = logits.dim(0);
  const int K = logits.dim(1);
  if (static_cast<int>(targets.size()) != N || static_cast<int>(weights.size()) != N) {
    throw Error(ErrorKind::kShapeMismatch, "cross-entropy targets do not match logits");
  }
  double wsum = 0.0;
  for (double w : weights) wsum += w;
  double loss = 0.0;
  Tensor probs({N, K});
  for (int i = 0; i < N; ++i) {
    const auto lp = log_softmax_row(logits.value().data() + static_cast<std::size_t>(i) * K, K);
    loss -= weights[i] * lp[targets[i]];
    for (int k = 0; k < K; ++k) probs.at(i, k) = std::exp(lp[k]);
  }
  loss /= wsum;
  return nn::custom_op({logits}, Tensor({1}, {loss}),
                       [=, probs = std::move(probs)](const Tensor& g, std::vector<Tensor*>& grads) {
                         Tensor& d = *grads[0];
                         for (int i = 0; i < N; ++i) {
                           const double c = g[0] * weights[i] / wsum;
                           for (int k = 0; k < K; ++k) {
                             d.at(i, k) += c * (probs.at(i, k) - (k == targets[i] ? 1.0 : 0.0));
                           }
                         }
                       });
}

Var mask_bce_loss(const Var& mask_logits, const std::vector<std::pair<int, const core::BinaryMask*>>& pairs) {
  const std::size_t P = static_cast<std::size_t>(mask_logits.dim(1));
  double loss = 0.0;
  for (const auto& [row, gt] : pairs) loss += mean_bce(mask_logits.value().data() + row * P, *gt);
  const double denom = std::max<std::size_t>(1, pairs.size());
  loss /= denom;
  return nn::custom_op({mask_logits}, Tensor({1}, {loss}),
                       [mask_logits, pairs, P, denom](const Tensor& g, std::vector<Tensor*>& grads) {
                         const double c = g[0] / denom / static_cast<double>(P);
                         for (const auto& [row, gt] : pairs) {
                           const double* x = mask_logits.value().data() + row * P;
                           double* d = grads[0]->data() + row * P;
                           const auto y = gt->data();
                           for (std::size_t k = 0; k < P; ++k) d[k] += c * (sigmoid(x[k]) - y[k]);
                         }
                       });
}

Var mask_dice_loss(const Var& mask_logits, const std::vector<std::pair<int, const core::BinaryMask*>>& pairs) {
  const std::size_t P = static_cast<std::size_t>(mask_logits.dim(1));
  double loss = 0.0;
  for (const auto& [row, gt] : pairs) loss += 1.0 - soft_dice(mask_logits.value().data() + row * P, *gt);
  const double denom = std::max<std::size_t>(1, pairs.size());
  loss /= denom;
  return nn::custom_op({mask_logits}, Tensor({1}, {loss}),
                       [mask_logits, pairs, P, denom](const Tensor& g, std::vector<Tensor*>& grads) {
                         for (const auto& [row, gt] : pairs) {
                           const double* x = mask_logits.value().data() + row * P;
                           double* d = grads[0]->data() + row * P;
                           const auto y = gt->data();
                           double inter = 0.0;
                           double ssum = 0.0;
                           double ysum = 0.0;
                           for (std::size_t k = 0; k < P; ++k) {
                             const double s = sigmoid(x[k]);
                             inter += s * y[k];
                             ssum += s;
                             ysum += y[k];
                           }
                           const double num = 2.0 * inter + 1.0;
                           const double den = ssum + ysum + 1.0;
                           for (std::size_t k = 0; k < P; ++k) {
                             const double s = sigmoid(x[k]);
                             const double dds = -(2.0 * y[k] * den - num) / (den * den);
                             d[k] += g[0] / denom * dds * s * (1.0 - s);
                           }
                         }
                       });
}

SegLoss segmentation_loss(const Var& class_logits, const Var& mask_logits,
                          const std::vector<GtInstance>& gt, const Matching& assignment,
                          const LossWeights& w) {
  const int N = class_logits.dim(0);
  const int no_object = class_logits.dim(1) - 1;
  std::vector<int> targets(N, no_object);
  std::vector<double> weights(N, w.no_object);
  std::vector<std::pair<int, const core::BinaryMask*>> pairs;
  for (const auto& [q, g] : assignment.pairs) {
    targets[q] = gt[g].class_index;
    weights[q] = 1.0;
    pairs.emplace_back(q, &gt[g].mask);
  }
  SegLoss out;
  out.cls = weighted_cross_entropy(class_logits, targets, weights);
  out.bce = mask_bce_loss(mask_logits, pairs);
  out.dice = mask_dice_loss(mask_logits, pairs);
  out.total = nn::weighted_sum({out.cls, out.bce, out.dice}, {w.cls, w.mask_bce, w.mask_dice});
  return out;
}

SsiAlignment ssi_align(const double* pred, const double* target, const std::uint8_t* mask, std::size_t n) {
  double cnt = 0.0;
  double sp = 0.0;
  double st = 0.0;
  double spp = 0.0;
  double spt = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (mask && !mask[k]) continue;
    cnt += 1.0;
    sp += pred[k];
    st += target[k];
    spp += pred[k] * pred[k];
    spt += pred[k] * target[k];
  }
  SsiAlignment a;
  a.pixels = static_cast<std::size_t>(cnt);
  const double D = cnt * spp - sp * sp;
  if (cnt < 2 || D <= 1e-12 * std::max(1e-300, cnt * spp)) {
    a.shift_only = true;
    a.scale = 1.0;
    a.shift = cnt > 0 ? (st - sp) / cnt : 0.0;
    return a;
  }
  a.scale = (cnt * spt - sp * st) / D;
  a.shift = (st - a.scale * sp) / cnt;
  return a;
}

Var depth_loss_ssi(const Var& pred, const std::vector<double>& target, const std::vector<std::uint8_t>* mask) {
  const std::size_t n = pred.value().numel();
  if (target.size() != n || (mask && mask->size() != n)) {
    throw Error(ErrorKind::kShapeMismatch, "depth prediction, target and mask sizes differ");
  }
  const double* p = pred.value().data();
  const std::uint8_t* m = mask ? mask->data() : nullptr;
  const SsiAlignment al = ssi_align(p, target.data(), m, n);
  if (al.pixels < 2) {
    throw Error(ErrorKind::kInsufficientPixels, "SSI loss needs at least 2 pixels, got " + std::to_string(al.pixels));
  }
  const double cnt = static_cast<double>(al.pixels);
  double loss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (m && !m[k]) continue;
    loss += std::abs(al.scale * p[k] + al.shift - target[k]);
  }
  loss /= cnt;
  return nn::custom_op(
      {pred}, Tensor({1}, {loss}),
      [pred, target, mask_copy = mask ? *mask : std::vector<std::uint8_t>{}, al, cnt](const Tensor& g,
                                                                                    std::vector<Tensor*>& grads) {
        const std::size_t n = target.size();
        const double* p = pred.value().data();
        const std::uint8_t* m = mask_copy.empty() ? nullptr : mask_copy.data();
        const double a = al.scale;
        const double b = al.shift;
        double s0 = 0.0;
        double s1 = 0.0;
        double sp = 0.0;
        double st = 0.0;
        double spp = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (m && !m[k]) continue;
          const double r = a * p[k] + b - target[k];
          const double s = (r > 0) - (r < 0);
          s0 += s;
          s1 += s * p[k];
          sp += p[k];
          st += target[k];
          spp += p[k] * p[k];
        }
        const double D = cnt * spp - sp * sp;
        double* d = grads[0]->data();
        for (std::size_t k = 0; k < n; ++k) {
          if (m && !m[k]) continue;
          const double r = a * p[k] + b - target[k];
          const double s = (r > 0) - (r < 0);
          double da = 0.0;
          double db = -1.0 / cnt;
          if (!al.shift_only) {
            da = ((cnt * target[k] - st) - a * (2.0 * cnt * p[k] - 2.0 * sp)) / D;
            db = (-sp * da - a) / cnt;
          }
          d[k] += g[0] * (s * a + s1 * da + s0 * db) / cnt;
        }
      });
}

Var contrastive_loss(const Var& embeddings, const std::vector<int>& frame_of, const std::vector<int>& label,
                     double temperature) {
  const int M = embeddings.dim(0);
  if (static_cast<int>(frame_of.size()) != M || static_cast<int>(label.size()) != M) {
    throw Error(ErrorKind::kShapeMismatch, "contrastive labels do not match embeddings");
  }
  const Var sim = nn::scale(nn::matmul_nt(embeddings, embeddings), 1.0 / temperature);
  const Tensor& S = sim.value();
  // Per-anchor softmax over candidates and over positives.
  Tensor pc({M, M}, 0.0);
  Tensor pp({M, M}, 0.0);
  double loss = 0.0;
  int anchors = 0;
  for (int i = 0; i < M; ++i) {
    double mx = -1e300;
    bool has_pos = false;
    for (int j = 0; j < M; ++j) {
      if (frame_of[j] == frame_of[i]) continue;
      mx = std::max(mx, S.at(i, j));
      if (label[j] == label[i]) has_pos = true;
    }
    if (!has_pos) continue;
    double zc = 0.0;
    double zp = 0.0;
    for (int j = 0; j < M; ++j) {
      if (frame_of[j] == frame_of[i]) continue;
      const double e = std::exp(S.at(i, j) - mx);
      pc.at(i, j) = e;
      zc += e;
      if (label[j] == label[i]) {
        pp.at(i, j) = e;
        zp += e;
      }
    }
    for (int j = 0; j < M; ++j) {
      pc.at(i, j) /= zc;
      pp.at(i, j) /= zp;
    }
    loss += std::log(zc) - std::log(zp);
    ++anchors;
  }
  if (anchors == 0) return nn::constant(Tensor({1}, {0.0}));
  loss /= anchors;
  return nn::custom_op({sim}, Tensor({1}, {loss}),
                       [pc = std::move(pc), pp = std::move(pp), anchors, M](const Tensor& g,
                                                                          std::vector<Tensor*>& grads) {
                         Tensor& d = *grads[0];
                         for (int i = 0; i < M; ++i) {
                           for (int j = 0; j < M; ++j) d.at(i, j) += g[0] * (pc.at(i, j) - pp.at(i, j)) / anchors;
                         }
                       });
}

}  // namespace depthvis::train
