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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "depthvis/core/error.hpp"
#include "depthvis/model/checkpoint.hpp"
#include "depthvis/model/model.hpp"
#include "depthvis/nn/autograd.hpp"
#include "depthvis/nn/ops.hpp"
#include "depthvis/train/hungarian.hpp"
#include "depthvis/train/losses.hpp"
#include "depthvis/train/stages.hpp"

using namespace depthvis;
using nn::Tensor;
using nn::Var;
using testing::random_tensor;
using train::Stage;
namespace fs = std::filesystem;

namespace {

void check_matrix(const std::vector<double>& c, int M, int N) {
  const auto m = train::hungarian_match(Tensor({M, N}, c));
  const auto b = testing::brute_force_assignment(c, M, N);
  REQUIRE(m.cost == b.cost);
  REQUIRE(m.pairs == b.pairs);
}

core::BinaryMask random_mask(std::mt19937_64& rng, int h, int w) {
  core::BinaryMask m(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(y, x, rng() % 3 == 0);
  }
  m.set(0, 0, true);
  return m;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Independent re-implementation of the matching cost formula.
double oracle_cost(const Tensor& cls, const Tensor& masks, int i, const train::GtInstance& g) {
  const int C1 = cls.dim(1);
  double mx = -1e300;
  for (int c = 0; c < C1; ++c) mx = std::max(mx, cls.at(i, c));
  double z = 0;
  for (int c = 0; c < C1; ++c) z += std::exp(cls.at(i, c) - mx);
  const double logp = cls.at(i, g.class_index) - mx - std::log(z);
  const int P = masks.dim(1);
  double bce = 0;
  double inter = 0;
  double ssum = 0;
  double ysum = 0;
  for (int p = 0; p < P; ++p) {
    const double x = masks.at(i, p);
    const double y = g.mask.data()[p];
    const double s = sigmoid(x);
    bce += -(y * std::log(s) + (1 - y) * std::log(1 - s));
    inter += s * y;
    ssum += s;
    ysum += y;
  }
  bce /= P;
  const double dice = (2 * inter + 1) / (ssum + ysum + 1);
  return 2.0 * -logp + 5.0 * bce + 5.0 * (1 - dice);
}

void fd_check(const Tensor& x, const std::function<Var(const Var&)>& loss_fn) {
  for (const auto& e : testing::finite_difference(x, loss_fn)) {
    INFO("element " << e.index << " numeric " << e.numeric << " analytic " << e.analytic);
    CHECK(e.rel_error <= 1e-3);
  }
}

std::map<std::string, std::vector<double>> snapshot(const model::VisModel& m) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& p : m.params().entries()) out[p.name] = p.var.value().values();
  return out;
}

bool starts_with_any(const std::string& name, const std::vector<std::string>& prefixes) {
  return std::any_of(prefixes.begin(), prefixes.end(),
                     [&](const std::string& p) { return name.rfind(p, 0) == 0; });
}

}  // namespace

TEST_CASE("hungarian: examples and tie-break") {
  auto m = train::hungarian_match(Tensor({2, 2}, {1, 2, 2, 1}));
  CHECK(m.pairs == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});
  CHECK(m.cost == 2);
  m = train::hungarian_match(Tensor({3, 3}, 0.0));
  CHECK(m.pairs == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}, {2, 2}});
  CHECK(m.cost == 0);
  try {
    train::hungarian_match(Tensor({2, 2}, {1, NAN, 0, 0}));
    FAIL("expected NonFiniteCost");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNonFiniteCost);
  }
}

TEST_CASE("hungarian: exhaustive small matrices equal the permutation brute force") {
  for (int M = 1; M <= 4; ++M) {
    for (int N = 1; N <= 4; ++N) {
      testing::for_each_matrix(M, N, testing::exhaustive_levels(M, N),
                               [&](const std::vector<double>& c) { check_matrix(c, M, N); });
    }
  }
}

TEST_CASE("hungarian: random 4x4 small-integer and 6x6 matrices") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20000; ++trial) {
    std::vector<double> c(16);
    for (auto& v : c) v = static_cast<double>(rng() % 5);
    check_matrix(c, 4, 4);
  }
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> c(36);
    for (auto& v : c) v = trial % 2 ? u(rng) : static_cast<double>(rng() % 4);
    const auto m = train::hungarian_match(Tensor({6, 6}, c));
    const auto b = testing::brute_force_assignment(c, 6, 6);
    CHECK(std::abs(m.cost - b.cost) <= 1e-9);
    CHECK(std::abs(train::assignment_optimum(c, 6, 6) - b.cost) <= 1e-9);
    if (trial % 2 == 0) CHECK(m.pairs == b.pairs);
  }
  for (int trial = 0; trial < 200; ++trial) {
    const int M = 1 + rng() % 6;
    const int N = 1 + rng() % 6;
    std::vector<double> c(M * N);
    for (auto& v : c) v = static_cast<double>(rng() % 4);
    check_matrix(c, M, N);
  }
}

TEST_CASE("matching_cost: formula oracle, best case and column symmetry") {
  std::mt19937_64 rng(4);
  const Tensor cls = random_tensor(rng, {3, 4});
  const Tensor masks = random_tensor(rng, {3, 64}, 2.0);
  std::vector<train::GtInstance> gt;
  for (int j = 0; j < 3; ++j) gt.push_back({j + 1, j % 3, random_mask(rng, 8, 8)});
  const Tensor cost = train::matching_cost(cls, masks, gt);
  CHECK(cost.shape() == std::vector<int>{3, 3});
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(std::abs(cost.at(i, j) - oracle_cost(cls, masks, i, gt[j])) <= 1e-9);
  }
  std::vector<train::GtInstance> swapped{gt[1], gt[0], gt[2]};
  const Tensor cs = train::matching_cost(cls, masks, swapped);
  for (int i = 0; i < 3; ++i) {
    CHECK(cs.at(i, 0) == cost.at(i, 1));
    CHECK(cs.at(i, 1) == cost.at(i, 0));
  }
  // A confident exact mask costs only its BCE floor.
  Tensor sharp_cls({1, 4}, {-50, 50, -50, -50});
  Tensor sharp_mask({1, 64});
  for (int p = 0; p < 64; ++p) sharp_mask[p] = gt[1].mask.data()[p] ? 30.0 : -30.0;
  const double c0 = train::matching_cost(sharp_cls, sharp_mask, {gt[1]}).at(0, 0);
  CHECK(c0 < 1e-6 * 5 + 5 * 2e-12 * 64 + 1e-9);
  CHECK(c0 >= 0);
  CHECK_THROWS_AS(train::matching_cost(cls, random_tensor(rng, {3, 63}), gt), Error);
}

TEST_CASE("segmentation_loss: perfect prediction, weight linearity, GT permutation") {
  std::mt19937_64 rng(5);
  std::vector<train::GtInstance> gt{{1, 0, random_mask(rng, 8, 8)}, {2, 2, random_mask(rng, 8, 8)}};
  Tensor cls({3, 4}, -20.0);
  cls.at(0, 0) = 20;
  cls.at(1, 2) = 20;
  cls.at(2, 3) = 20;
  Tensor masks({3, 64}, -20.0);
  for (int p = 0; p < 64; ++p) {
    masks.at(0, p) = gt[0].mask.data()[p] ? 20 : -20;
    masks.at(1, p) = gt[1].mask.data()[p] ? 20 : -20;
  }
  const auto match = train::hungarian_match(train::matching_cost(cls, masks, gt));
  CHECK(match.pairs == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});
  const auto l = train::segmentation_loss(Var(cls), Var(masks), gt, match);
  const double floor_bce = std::log1p(std::exp(-20.0));
  CHECK(std::abs(l.bce.value()[0] - floor_bce) <= 1e-12);
  // Dice is smoothed, so the perfect-mask term is 0 only up to the sigmoid tail.
  CHECK(l.dice.value()[0] <= 1e-6);

  const Tensor rc = random_tensor(rng, {4, 4});
  const Tensor rm = random_tensor(rng, {4, 64});
  const auto m1 = train::hungarian_match(train::matching_cost(rc, rm, gt));
  const auto base = train::segmentation_loss(Var(rc), Var(rm), gt, m1);
  train::LossWeights twice;
  twice.cls = 4;
  twice.mask_bce = 10;
  twice.mask_dice = 10;
  twice.no_object = 0.1;
  const auto doubled = train::segmentation_loss(Var(rc), Var(rm), gt, m1, twice);
  CHECK(doubled.total.value()[0] == doctest::Approx(2 * base.total.value()[0]).epsilon(1e-12));
  std::vector<train::GtInstance> perm{gt[1], gt[0]};
  const auto m2 = train::hungarian_match(train::matching_cost(rc, rm, perm));
  const auto permuted = train::segmentation_loss(Var(rc), Var(rm), perm, m2);
  CHECK(std::abs(permuted.total.value()[0] - base.total.value()[0]) <= 1e-12);
}

TEST_CASE("segmentation_loss gradients pass finite differences on a 2-query 8x8 instance") {
  std::mt19937_64 rng(6);
  std::vector<train::GtInstance> gt{{1, 1, random_mask(rng, 8, 8)}};
  const Tensor cls = random_tensor(rng, {2, 4});
  const Tensor masks = random_tensor(rng, {2, 64});
  const auto match = train::hungarian_match(train::matching_cost(cls, masks, gt));
  fd_check(cls, [&](const Var& c) { return train::segmentation_loss(c, Var(masks), gt, match).total; });
  fd_check(masks, [&](const Var& m) { return train::segmentation_loss(Var(cls), m, gt, match).total; });
  // Through the stride-4 upsampling used in training.
  const Tensor low = random_tensor(rng, {2, 4});
  fd_check(low, [&](const Var& m) {
    return train::segmentation_loss(Var(cls), train::upsample_mask_logits(m, 2, 2, 8, 8), gt, match).total;
  });
}

TEST_CASE("ssi depth loss: examples, oracle, invariance and gradients") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> target(64);
  for (auto& t : target) t = u(rng);
  Tensor same({1, 1, 8, 8}, target);
  CHECK(train::depth_loss_ssi(Var(same), target).value()[0] <= 1e-12);
  Tensor affine = same;
  for (auto& v : affine.values()) v = 2 * v + 1;
  CHECK(train::depth_loss_ssi(Var(affine), target).value()[0] <= 1e-12);

  for (int trial = 0; trial < 20; ++trial) {
    Tensor pred({1, 1, 8, 8});
    for (auto& v : pred.values()) v = u(rng) * 3 - 1;
    const double l = train::depth_loss_ssi(Var(pred), target).value()[0];
    CHECK(std::abs(l - testing::ssi_l1(pred.values(), target)) <= 1e-9);
    std::uniform_real_distribution<double> a_dist(0.01, 20.0);
    std::uniform_real_distribution<double> b_dist(-10.0, 10.0);
    Tensor moved = pred;
    const double a = a_dist(rng);
    const double b = b_dist(rng);
    for (auto& v : moved.values()) v = a * v + b;
    CHECK(std::abs(train::depth_loss_ssi(Var(moved), target).value()[0] - l) <= 1e-6);
  }

  Tensor pred = random_tensor(rng, {1, 1, 8, 8});
  fd_check(pred, [&](const Var& p) { return train::depth_loss_ssi(p, target); });
  std::vector<uint8_t> mask(64, 0);
  for (int i = 0; i < 64; i += 3) mask[i] = 1;
  fd_check(pred, [&](const Var& p) { return train::depth_loss_ssi(p, target, &mask); });

  // Constant prediction falls back to shift-only alignment: the loss is the
  // mean absolute deviation of the target from its mean.
  double mean = std::accumulate(target.begin(), target.end(), 0.0) / 64;
  double mad = 0;
  for (double t : target) mad += std::abs(t - mean);
  const Tensor flat({1, 1, 8, 8}, 0.3);
  CHECK(std::abs(train::depth_loss_ssi(Var(flat), target).value()[0] - mad / 64) <= 1e-12);

  std::vector<uint8_t> one(64, 0);
  one[5] = 1;
  try {
    train::depth_loss_ssi(Var(pred), target, &one);
    FAIL("expected InsufficientPixels");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInsufficientPixels);
  }
}

TEST_CASE("contrastive loss gradients pass finite differences") {
  std::mt19937_64 rng(8);
  const Tensor x = random_tensor(rng, {6, 5});
  const std::vector<int> frame{0, 0, 1, 1, 2, 2};
  const std::vector<int> label{1, 2, 1, 2, 1, 2};
  fd_check(x, [&](const Var& v) {
    return train::contrastive_loss(nn::l2_normalize_rows(v), frame, label, 0.1);
  });
}

TEST_CASE("stages: order, predecessor errors and trainable groups") {
  CHECK(train::predecessor(Stage::kImage) == std::nullopt);
  CHECK(train::predecessor(Stage::kRefiner) == Stage::kTracker);
  CHECK(train::stage_from_string("tracker") == Stage::kTracker);
  CHECK_THROWS_AS(train::stage_from_string("bogus"), Error);
  const auto dir = testing::scratch_dir("train_order");
  try {
    train::check_predecessor(Stage::kTracker, dir / "nothing");
    FAIL("expected MissingPredecessor");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kMissingPredecessor);
  }
  try {
    train::check_predecessor(Stage::kTracker, std::nullopt);
    FAIL("expected MissingPredecessor");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kMissingPredecessor);
  }
  model::VisModel m(testing::toy_model(model::Variant::kRgbBaseline));
  model::save_checkpoint(m, "image", dir / "image");
  try {
    train::check_predecessor(Stage::kTracker, dir / "image");
    FAIL("expected StageOrderViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kStageOrderViolation);
  }
  CHECK_NOTHROW(train::check_predecessor(Stage::kSegmenter, dir / "image"));

  model::VisModel sv(testing::toy_model(model::Variant::kSv));
  train::apply_stage_freezing(sv, Stage::kSegmenter);
  for (const auto& p : sv.params().entries()) {
    const bool shared = p.name.rfind("backbone.", 0) == 0 || p.name.rfind("depth_head.", 0) == 0;
    const bool seg = p.name.rfind("adapter.", 0) == 0 || p.name.rfind("decoder.", 0) == 0 ||
                     p.name.rfind("pixel_decoder.", 0) == 0;
    if (shared) CHECK(p.frozen);
    if (seg) CHECK_FALSE(p.frozen);
    if (p.name.rfind("tracker.", 0) == 0) CHECK(p.frozen);
  }
  fs::remove_all(dir);
}

TEST_CASE("four-stage run: freezing is byte-exact, logs echo the config, runs are deterministic") {
  const auto synthetic = testing::toy_dataset();
  const auto data = train::make_train_set(synthetic, train::DepthQuality::kGt);
  const auto cfg = testing::toy_model(model::Variant::kEdc);
  const auto dir = testing::scratch_dir("train_stages");

  auto run_all = [&](const fs::path& root) {
    std::optional<fs::path> prev;
    std::vector<std::vector<train::LogRecord>> logs;
    for (Stage s : {Stage::kImage, Stage::kSegmenter, Stage::kTracker, Stage::kRefiner}) {
      train::StageConfig sc;
      sc.stage = s;
      // The refiner only sees tracks once the segmenter detects something.
      sc.iters = s == Stage::kImage ? 120 : 4;
      sc.lr = s == Stage::kImage ? 3e-3 : 1e-4;
      sc.seed = 3;
      sc.init_from = prev;
      const auto ckpt = root / train::to_string(s);
      auto before = prev ? model::load_checkpoint(*prev).model : nullptr;
      const auto res = train::run_stage(sc, cfg, data, ckpt, root / (std::string(train::to_string(s)) + ".ndjson"));
      if (before) {
        const auto allowed = train::trainable_prefixes(s, *before);
        const auto a = snapshot(*before);
        const auto b = snapshot(*res.model);
        int changed = 0;
        for (const auto& [name, values] : a) {
          if (starts_with_any(name, allowed)) {
            changed += values != b.at(name);
          } else {
            INFO(train::to_string(s) << " changed frozen " << name);
            CHECK(values == b.at(name));
          }
        }
        INFO("stage " << std::string(train::to_string(s)));
        CHECK(changed > 0);
      }
      logs.push_back(res.log);
      prev = ckpt;
    }
    return logs;
  };

  const auto logs = run_all(dir / "a");
  CHECK(logs[0].size() == 120);
  for (std::size_t i = 1; i < logs.size(); ++i) CHECK(logs[i].size() == 4);
  std::ifstream f(dir / "a" / "tracker.ndjson");
  std::string first;
  std::getline(f, first);
  const auto echo = nlohmann::json::parse(first);
  CHECK(echo["config"]["lr"].get<double>() == 1.0e-4);
  CHECK(echo["config"]["weight_decay"].get<double>() == 5.0e-2);
  CHECK(echo["config"]["stage"] == "tracker");
  std::string rec;
  std::getline(f, rec);
  const auto r = nlohmann::json::parse(rec);
  for (const char* key : {"iter", "stage", "loss_total", "loss_cls", "loss_mask", "loss_dice", "loss_depth", "lr"}) {
    CHECK(r.contains(key));
  }

  run_all(dir / "b");
  const auto a = model::load_checkpoint(dir / "a" / "refiner");
  const auto b = model::load_checkpoint(dir / "b" / "refiner");
  CHECK(snapshot(*a.model) == snapshot(*b.model));
  fs::remove_all(dir);
}

TEST_CASE("auxiliary depth: weight 0 trains exactly like the baseline") {
  const auto synthetic = testing::toy_dataset();
  const auto data = train::make_train_set(synthetic, train::DepthQuality::kGt);
  train::StageConfig sc;
  sc.iters = 5;
  sc.seed = 4;
  sc.lr = 1e-3;
  model::VisModel base(testing::toy_model(model::Variant::kRgbBaseline));
  for (auto v : {model::Variant::kDs, model::Variant::kDsQuery}) {
    auto c = testing::toy_model(v);
    c.depth_weight = 0.0;
    model::VisModel ds(c);
    model::VisModel ref(testing::toy_model(model::Variant::kRgbBaseline));
    train::train_stage(ref, sc, data);
    train::train_stage(ds, sc, data);
    const auto batch = train::make_batch(data, {{0, 0}, {1, 2}});
    const auto a = ref.forward(batch);
    const auto b = ds.forward(batch);
    for (std::size_t t = 0; t < a.size(); ++t) {
      CHECK(a[t].class_logits.value().values() == b[t].class_logits.value().values());
      CHECK(a[t].mask_logits.value().values() == b[t].mask_logits.value().values());
    }
  }
}

TEST_CASE("auxiliary depth: both losses decrease over 200 steps on 4 videos") {
  const auto synthetic = testing::toy_dataset(2, 6, 32);
  const auto data = train::make_train_set(synthetic, train::DepthQuality::kGt);
  model::VisModel ds(testing::toy_model(model::Variant::kDs));
  train::StageConfig sc;
  sc.iters = 200;
  sc.seed = 2;
  sc.lr = 1e-3;
  const auto log = train::train_stage(ds, sc, data);
  auto window_mean = [&](std::size_t from, auto field) {
    double s = 0;
    for (std::size_t i = from; i < from + 20; ++i) s += field(log[i]);
    return s / 20;
  };
  auto seg = [](const train::LogRecord& r) { return r.loss_total - r.loss_depth; };
  auto dep = [](const train::LogRecord& r) { return r.loss_depth; };
  CHECK(window_mean(180, seg) < window_mean(0, seg));
  CHECK(window_mean(180, dep) < window_mean(0, dep));
}
