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

// Acceptance runner: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
//
//   depthvis_acceptance [--only 1,6,...] [--results DIR] [--reuse]
//
// The experiment criteria (6-8) share an on-disk run cache under DIR. It is
// wiped first unless --reuse is given, so runtimes are measured cold.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include "depthvis/core/annotations.hpp"
#include "depthvis/core/iou.hpp"
#include "depthvis/core/rle.hpp"
#include "depthvis/depth/depth_cache.hpp"
#include "depthvis/depth/depth_map.hpp"
#include "depthvis/eval/metrics.hpp"
#include "depthvis/harness/experiment.hpp"
#include "depthvis/model/checkpoint.hpp"
#include "depthvis/model/model.hpp"
#include "depthvis/nn/ops.hpp"
#include "depthvis/train/hungarian.hpp"
#include "depthvis/train/losses.hpp"
#include "depthvis/train/stages.hpp"

using namespace depthvis;
namespace fs = std::filesystem;
using nn::Tensor;
using nn::Var;
using train::Stage;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Accumulates named checks; the first few failures are kept for the report.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (ok) return;
    ++failed_;
    if (failures_.size() < 3) failures_.push_back(what);
  }
  Outcome outcome(const std::string& summary) const {
    std::string d = summary;
    if (failed_ > 0) {
      d += "; " + std::to_string(failed_) + "/" + std::to_string(total_) + " checks failed:";
      for (const auto& f : failures_) d += " [" + f + "]";
    }
    return {failed_ == 0, d};
  }

 private:
  int total_ = 0;
  int failed_ = 0;
  std::vector<std::string> failures_;
};

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

double rel_diff(const Tensor& a, const Tensor& b) {
  double num = 0;
  double den = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / std::max(den, 1e-12);
}

using Snapshot = std::map<std::string, std::vector<double>>;

Snapshot snapshot(const model::VisModel& m) {
  Snapshot out;
  for (const auto& p : m.params().entries()) out[p.name] = p.var.value().values();
  return out;
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

bool starts_with_any(const std::string& name, const std::vector<std::string>& prefixes) {
  return std::any_of(prefixes.begin(), prefixes.end(), [&](const std::string& p) { return starts_with(name, p); });
}

model::FrameBatch random_batch(std::mt19937_64& rng, int h, int w) {
  model::FrameBatch fb;
  fb.batch = 1;
  fb.height = h;
  fb.width = w;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  fb.rgb.resize(static_cast<std::size_t>(3) * h * w);
  for (auto& x : fb.rgb) x = std::floor(u(rng) * 256.0);
  fb.depth.resize(static_cast<std::size_t>(h) * w);
  for (auto& x : fb.depth) x = u(rng);
  return fb;
}

// Runs the four stages through run_stage, recording the model after each.
std::vector<Snapshot> four_stages(const model::ModelConfig& cfg, const train::TrainSet& data, const fs::path& root,
                                  std::vector<std::vector<std::string>>* trainable = nullptr) {
  std::vector<Snapshot> out;
  std::optional<fs::path> prev;
  for (Stage s : {Stage::kImage, Stage::kSegmenter, Stage::kTracker, Stage::kRefiner}) {
    train::StageConfig sc;
    sc.stage = s;
    // The refiner only sees tracks once the segmenter detects something.
    sc.iters = s == Stage::kImage ? 120 : 10;
    sc.lr = s == Stage::kImage ? 3e-3 : 1e-4;
    sc.seed = 3;
    sc.depth_pretrain_iters = 20;
    sc.init_from = prev;
    const auto ckpt = root / train::to_string(s);
    const auto res = train::run_stage(sc, cfg, data, ckpt, root / (std::string(train::to_string(s)) + ".ndjson"));
    if (trainable) trainable->push_back(train::trainable_prefixes(s, *res.model));
    out.push_back(snapshot(*res.model));
    prev = ckpt;
  }
  return out;
}

Outcome criterion_1(const fs::path&) {
  // The model size used by the experiment harness and the CLI defaults.
  model::ModelConfig cfg = harness::default_plan().model;
  cfg.variant = model::Variant::kRgbBaseline;
  cfg.backbone.in_channels = 3;
  cfg.seed = 11;
  model::VisModel rgb(cfg);
  const auto edc = model::convert_to_edc(rgb, model::EdcInit::kZero);
  std::mt19937_64 rng(1);
  double worst = 0;
  for (int pair = 0; pair < 20; ++pair) {
    const auto batch = random_batch(rng, 64, 64);
    const auto a = rgb.forward(batch);
    const auto b = edc->forward(batch);
    worst = std::max({worst, rel_diff(b[0].class_logits.value(), a[0].class_logits.value()),
                      rel_diff(b[0].mask_logits.value(), a[0].mask_logits.value()),
                      rel_diff(b[0].query_embed.value(), a[0].query_embed.value())});
  }
  const bool four = edc->params().get(edc->input_layer_name()).dim(1) == 4;
  return {worst <= 1e-5 && four, "20 pairs, max relative difference " + fmt(worst) + " (tolerance 1e-5)"};
}

Outcome criterion_2(const fs::path& root) {
  Checks checks;
  const auto synthetic = testing::toy_dataset();
  const auto data = train::make_train_set(synthetic, train::DepthQuality::kGt);
  int compared = 0;
  for (auto v : {model::Variant::kEdc, model::Variant::kSv}) {
    std::vector<std::vector<std::string>> trainable;
    const auto snaps = four_stages(testing::toy_model(v), data, root / "crit2" / model::to_string(v), &trainable);
    for (int s : {2, 3}) {
      int changed = 0;
      for (const auto& [name, before] : snaps[s - 1]) {
        if (starts_with_any(name, trainable[s])) {
          changed += before != snaps[s].at(name);
        } else {
          ++compared;
          checks.expect(before == snaps[s].at(name), std::string(model::to_string(v)) + " stage " +
                                                         std::to_string(s) + " changed frozen " + name);
        }
      }
      checks.expect(changed > 0, std::string(model::to_string(v)) + " stage " + std::to_string(s) + " trained nothing");
    }
  }
  fs::remove_all(root / "crit2");
  return checks.outcome(std::to_string(compared) + " frozen tensors compared byte-for-byte after tracker and refiner");
}

Outcome criterion_3(const fs::path&) {
  Checks checks;
  long matrices = 0;
  for (int M = 1; M <= 4; ++M) {
    for (int N = 1; N <= 4; ++N) {
      testing::for_each_matrix(M, N, testing::exhaustive_levels(M, N), [&](const std::vector<double>& c) {
        const auto m = train::hungarian_match(Tensor({M, N}, c));
        const auto b = testing::brute_force_assignment(c, M, N);
        checks.expect(m.cost == b.cost && m.pairs == b.pairs, std::to_string(M) + "x" + std::to_string(N));
        ++matrices;
      });
    }
  }
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> c(36);
    for (auto& v : c) v = u(rng);
    const auto m = train::hungarian_match(Tensor({6, 6}, c));
    const auto b = testing::brute_force_assignment(c, 6, 6);
    checks.expect(std::abs(m.cost - b.cost) <= 1e-9, "6x6 trial " + std::to_string(trial));
  }
  return checks.outcome(std::to_string(matrices) + " exhaustive small-integer matrices and 200 random 6x6");
}

Outcome criterion_4(const fs::path& root) {
  Checks checks;
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int h = 1 + static_cast<int>(rng() % 12);
    const int w = 1 + static_cast<int>(rng() % 12);
    core::MaskTrack a(5);
    core::MaskTrack b(5);
    for (int t = 0; t < 5; ++t) {
      if (rng() % 4) a[t] = testing::random_mask(rng, h, w, 0.4);
      if (rng() % 4) b[t] = testing::random_mask(rng, h, w, 0.4);
    }
    checks.expect(std::abs(core::tube_iou(a, b) - testing::brute_tube_iou(a, b)) <= 1e-12, "tube_iou");
  }

  // Small instances: up to 3 predictions and 2 ground-truth tracks per
  // category on 2x2 frames, with scores drawn from a tie-prone set.
  const std::vector<double> scores{0.9, 0.5, 0.5, 0.2};
  int instances = 0;
  for (int n_pred = 0; n_pred <= 3; ++n_pred) {
    for (int n_gt = 0; n_gt <= 2; ++n_gt) {
      for (int trial = 0; trial < 500; ++trial) {
        const int videos = 1 + rng() % 2;
        const int cats = 1 + rng() % 2;
        const int frames = 1 + rng() % 2;
        std::vector<std::tuple<int, int, core::MaskTrack>> items;
        for (int c = 1; c <= cats; ++c) {
          for (int i = 0; i < n_gt; ++i) items.emplace_back(1 + rng() % videos, c, testing::random_track(rng, frames, 2, 2));
        }
        const auto gt = testing::make_gt(items, videos, cats, frames, 2, 2);
        std::vector<eval::EvalPrediction> preds;
        for (int i = 0; i < n_pred; ++i) {
          preds.push_back({static_cast<int>(1 + rng() % videos), static_cast<int>(1 + rng() % cats),
                           scores[rng() % scores.size()], testing::random_track(rng, frames, 2, 2)});
        }
        if (!items.empty() && !preds.empty() && rng() % 2) {
          const auto& [v, c, m] = items[rng() % items.size()];
          preds[0] = {v, c, 0.7, m};
        }
        const auto r = eval::evaluate_ap(preds, gt);
        const auto o = testing::reference_evaluate(preds, gt);
        checks.expect(std::abs(r.ap - o.ap) <= 1e-9 && std::abs(r.ap50 - o.ap50) <= 1e-9 &&
                          std::abs(r.ap75 - o.ap75) <= 1e-9 && std::abs(r.ar1 - o.ar1) <= 1e-9 &&
                          std::abs(r.ar10 - o.ar10) <= 1e-9,
                      "evaluate_ap instance " + std::to_string(instances));
        ++instances;
      }
    }
  }

  std::uniform_int_distribution<int> dim(1, 20);
  std::uniform_real_distribution<double> dens(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const int h = dim(rng);
    const int w = dim(rng);
    const auto m = testing::random_mask(rng, h, w, dens(rng));
    const auto r = core::rle_encode(m);
    const auto flat = testing::expand_runs(r.counts);
    bool ok = core::rle_decode(r) == m && flat.size() == static_cast<std::size_t>(h * w);
    for (int x = 0; ok && x < w; ++x) {
      for (int y = 0; y < h; ++y) ok = ok && flat[x * h + y] == m.at(y, x);
    }
    checks.expect(ok, "rle round trip");
  }

  const auto dir = root / "crit4_cache";
  fs::remove_all(dir);
  for (int batch = 0; batch < 50; ++batch) {
    std::vector<depth::DepthMap> maps;
    for (int i = 0; i < 20; ++i) {
      std::uniform_real_distribution<double> lo(-5.0, 5.0);
      std::uniform_real_distribution<double> span(0.01, 50.0);
      const double a = lo(rng);
      std::uniform_real_distribution<double> v(a, a + span(rng));
      std::vector<double> vals(static_cast<std::size_t>(5 + i % 4) * (6 + i % 3));
      for (auto& x : vals) x = v(rng);
      maps.push_back(depth::make_depth_map(5 + i % 4, 6 + i % 3, std::move(vals), depth::DepthSource::kSyntheticGt));
    }
    depth::write_depth_cache(maps, dir);
    const auto back = depth::read_depth_cache(dir);
    checks.expect(back.size() == maps.size(), "cache size");
    for (std::size_t i = 0; i < std::min(back.size(), maps.size()); ++i) {
      const double bound = (maps[i].max - maps[i].min) / 65535.0;
      bool ok = back[i].min == maps[i].min && back[i].max == maps[i].max;
      for (std::size_t k = 0; k < maps[i].values.size(); ++k) {
        ok = ok && std::abs(back[i].values[k] - maps[i].values[k]) <= bound * (1 + 1e-9);
      }
      checks.expect(ok, "depth cache bound");
    }
  }
  fs::remove_all(dir);
  return checks.outcome("200 tube pairs, " + std::to_string(instances) +
                        " evaluator instances, 1000 RLE masks, 1000 cached depth maps");
}

Outcome criterion_5(const fs::path&) {
  Checks checks;
  double worst = 0;
  auto fd = [&](const Tensor& x, const std::function<Var(const Var&)>& loss, const std::string& what) {
    const double e = testing::max_rel_error(testing::finite_difference(x, loss, 1e-4));
    worst = std::max(worst, e);
    checks.expect(e < 1e-3, what + " rel error " + fmt(e));
  };
  std::mt19937_64 rng(6);
  std::vector<train::GtInstance> gt{{1, 1, testing::random_mask(rng, 8, 8)}};
  const Tensor cls = testing::random_tensor(rng, {2, 4});
  const Tensor masks = testing::random_tensor(rng, {2, 64});
  const auto match = train::hungarian_match(train::matching_cost(cls, masks, gt));
  fd(cls, [&](const Var& c) { return train::segmentation_loss(c, Var(masks), gt, match).total; }, "seg/cls");
  fd(masks, [&](const Var& m) { return train::segmentation_loss(Var(cls), m, gt, match).total; }, "seg/mask");
  const Tensor low = testing::random_tensor(rng, {2, 4});
  fd(low,
     [&](const Var& m) {
       return train::segmentation_loss(Var(cls), train::upsample_mask_logits(m, 2, 2, 8, 8), gt, match).total;
     },
     "seg/upsampled");

  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> target(64);
  for (auto& t : target) t = u(rng);
  const Tensor pred = testing::random_tensor(rng, {1, 1, 8, 8});
  fd(pred, [&](const Var& p) { return train::depth_loss_ssi(p, target); }, "ssi");
  std::vector<uint8_t> valid(64, 0);
  for (int i = 0; i < 64; i += 3) valid[i] = 1;
  fd(pred, [&](const Var& p) { return train::depth_loss_ssi(p, target, &valid); }, "ssi/masked");

  double drift = 0;
  std::uniform_real_distribution<double> a_dist(0.01, 20.0);
  std::uniform_real_distribution<double> b_dist(-10.0, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor p({1, 1, 8, 8});
    for (auto& v : p.values()) v = u(rng) * 3 - 1;
    const double l = train::depth_loss_ssi(Var(p), target).value()[0];
    checks.expect(std::abs(l - testing::ssi_l1(p.values(), target)) <= 1e-9, "ssi oracle");
    Tensor moved = p;
    const double a = a_dist(rng);
    const double b = b_dist(rng);
    for (auto& v : moved.values()) v = a * v + b;
    drift = std::max(drift, std::abs(train::depth_loss_ssi(Var(moved), target).value()[0] - l));
  }
  checks.expect(drift <= 1e-6, "ssi affine drift " + fmt(drift));
  return checks.outcome("max finite-difference relative error " + fmt(worst) + " (< 1e-3), SSI affine drift " +
                        fmt(drift) + " (<= 1e-6)");
}

std::string row_summary(const harness::ComparisonRow& r) {
  return r.label + " AP " + fmt(r.median.ap) + " idsw " + fmt(r.median.id_switches);
}

const harness::ComparisonRow* find_row(const harness::ComparisonTable& t, const std::function<bool(const harness::ComparisonRow&)>& pred) {
  for (const auto& r : t.rows) {
    if (pred(r)) return &r;
  }
  return nullptr;
}

Outcome criterion_6(const fs::path& root) {
  const auto table = harness::run_comparison(harness::default_plan(), root / "experiments");
  std::cout << harness::format_table(table) << std::flush;
  const auto* rgb = find_row(table, [](const auto& r) { return r.variant == model::Variant::kRgbBaseline; });
  const auto* edc = find_row(table, [](const auto& r) { return r.variant == model::Variant::kEdc; });
  if (!rgb || !edc) return {false, "comparison table lacks rgb_baseline or edc"};
  const bool ap_ok = edc->median.ap >= rgb->median.ap;
  const bool idsw_ok = edc->median.id_switches < rgb->median.id_switches;
  return {ap_ok && idsw_ok, row_summary(*edc) + " vs " + row_summary(*rgb) + " (AP " + (ap_ok ? "ok" : "not met") +
                                ", idsw " + (idsw_ok ? "ok" : "not met") + ")"};
}

Outcome criterion_7(const fs::path& root) {
  const auto table = harness::ablate_depth_quality(harness::default_plan(), root / "experiments");
  std::cout << harness::format_table(table) << std::flush;
  const auto* gt = find_row(table, [](const auto& r) { return r.depth_quality == train::DepthQuality::kGt; });
  const auto* deg = find_row(table, [](const auto& r) { return r.depth_quality != train::DepthQuality::kGt; });
  if (!gt || !deg) return {false, "depth-quality table lacks a row"};
  return {gt->median.ap >= deg->median.ap, row_summary(*gt) + " vs " + row_summary(*deg)};
}

Outcome criterion_8(const fs::path& root) {
  const auto table = harness::ablate_edc_stage(harness::default_plan(), root / "experiments");
  std::cout << harness::format_table(table) << std::flush;
  const auto* early = find_row(table, [](const auto& r) { return r.edc_start == harness::EdcStart::kImage; });
  const auto* late = find_row(table, [](const auto& r) { return r.edc_start == harness::EdcStart::kSegmenter; });
  const auto* base = find_row(table, [](const auto& r) { return r.variant == model::Variant::kRgbBaseline; });
  if (table.rows.size() != 3 || !early || !late || !base) return {false, "edc-stage table does not have the three rows"};
  bool paired = true;
  for (const auto& r : table.rows) paired = paired && r.seeds == table.rows[0].seeds;
  const std::string inversion = base->median.ap > late->median.ap ? "baseline above late" : "late at or above baseline";
  return {paired && early->median.ap >= late->median.ap,
          row_summary(*early) + " vs " + row_summary(*late) + "; reported only: " + inversion + " (" +
              row_summary(*base) + ")" + (paired ? "" : "; seeds are not paired")};
}

Outcome criterion_9(const fs::path& root) {
  Checks checks;
  const auto synthetic = testing::toy_dataset();
  const auto data = train::make_train_set(synthetic, train::DepthQuality::kGt);
  const auto cfg = testing::toy_model(model::Variant::kSv);
  checks.expect(!cfg.adapter.injector, "config declares an injector");
  const auto snaps = four_stages(cfg, data, root / "crit9");

  // The image stage must not touch the shared backbone after depth fitting.
  model::VisModel fitted(cfg);
  train::pretrain_depth(fitted, data, 20, 1e-3, 3, 4);
  const auto after_fit = snapshot(fitted);
  int shared = 0;
  for (const auto& [name, values] : after_fit) {
    if (!starts_with(name, model::kBackbonePrefix) && !starts_with(name, model::kDepthHeadPrefix)) continue;
    ++shared;
    for (std::size_t s = 0; s < snaps.size(); ++s) {
      checks.expect(snaps[s].at(name) == values, "stage " + std::to_string(s) + " changed " + name);
    }
  }
  const auto loaded = model::load_checkpoint(root / "crit9" / "refiner");
  const auto& prior = loaded.model->params().get(model::VisModel::kSpatialPriorInput);
  checks.expect(prior.dim(1) == 4, "spatial prior has " + std::to_string(prior.dim(1)) + " input channels");
  int injector = 0;
  for (const auto& p : loaded.model->params().entries()) {
    injector += p.name.find("injector") != std::string::npos;
    if (starts_with(p.name, model::kBackbonePrefix)) checks.expect(p.frozen, p.name + " not frozen");
  }
  checks.expect(injector == 0, std::to_string(injector) + " injector parameters");
  checks.expect(shared > 0, "no shared parameters found");
  fs::remove_all(root / "crit9");
  return checks.outcome(std::to_string(shared) + " shared tensors byte-identical through 4 stages, spatial prior " +
                        std::to_string(prior.dim(1)) + "-channel, " + std::to_string(injector) +
                        " injector parameters");
}

Outcome criterion_10(const fs::path&) {
  Checks checks;
  const auto synthetic = testing::toy_dataset();
  const auto data = train::make_train_set(synthetic, train::DepthQuality::kGt);
  train::StageConfig sc;
  sc.iters = 5;
  sc.seed = 4;
  sc.lr = 1e-3;
  model::VisModel ref(testing::toy_model(model::Variant::kRgbBaseline));
  train::train_stage(ref, sc, data);
  const auto batch = train::make_batch(data, {{0, 0}, {1, 2}, {3, 5}});
  const auto expect = ref.forward(batch);
  for (auto v : {model::Variant::kDs, model::Variant::kDsQuery}) {
    auto c = testing::toy_model(v);
    c.depth_weight = 0.0;
    model::VisModel ds(c);
    train::train_stage(ds, sc, data);
    const auto got = ds.forward(batch);
    for (std::size_t t = 0; t < got.size(); ++t) {
      checks.expect(got[t].class_logits.value().values() == expect[t].class_logits.value().values() &&
                        got[t].mask_logits.value().values() == expect[t].mask_logits.value().values(),
                    std::string(model::to_string(v)) + " differs from the baseline");
    }
  }

  const auto four = testing::toy_dataset(2, 6, 32);
  const auto four_set = train::make_train_set(four, train::DepthQuality::kGt);
  model::VisModel ds(testing::toy_model(model::Variant::kDs));
  train::StageConfig long_run;
  long_run.iters = 200;
  long_run.seed = 2;
  long_run.lr = 1e-3;
  const auto log = train::train_stage(ds, long_run, four_set);
  auto window = [&](std::size_t from, auto field) {
    double s = 0;
    for (std::size_t i = from; i < from + 20; ++i) s += field(log[i]);
    return s / 20;
  };
  auto seg = [](const train::LogRecord& r) { return r.loss_total - r.loss_depth; };
  auto dep = [](const train::LogRecord& r) { return r.loss_depth; };
  const double seg0 = window(0, seg), seg1 = window(180, seg);
  const double dep0 = window(0, dep), dep1 = window(180, dep);
  checks.expect(four.videos.size() == 4, "training set is not 4 videos");
  checks.expect(seg1 < seg0, "segmentation loss did not decrease");
  checks.expect(dep1 < dep0, "depth loss did not decrease");
  return checks.outcome("weight 0 bit-equal for ds and ds_query; weight 1 over 200 steps: segmentation " + fmt(seg0) +
                        " -> " + fmt(seg1) + ", depth " + fmt(dep0) + " -> " + fmt(dep1));
}

int shell(const std::string& cmd, const fs::path& log) {
  const int status = std::system((cmd + " >> '" + log.string() + "' 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion_11(const fs::path& root) {
  const auto dir = root / "crit11";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto log = dir / "cli.log";
  const std::string cli = DEPTHVIS_CLI;
  const auto data = dir / "data";
  const auto cfg_path = dir / "config.json";
  {
    nlohmann::json cfg = {{"model", {{"variant", "edc"}}},
                          {"data", {{"root", data.string()}, {"depth_source", "gt"}}},
                          {"out_dir", (dir / "run").string()}};
    std::ofstream(cfg_path) << cfg.dump(2);
  }
  const std::string with_cfg = " --config '" + cfg_path.string() + "'";
  std::vector<std::pair<std::string, std::string>> steps{
      {"synth-gen", " synth-gen --scenario crossing,exit_enter --num-videos 10 --twin --out '" + data.string() + "'"},
      {"prepare-depth", " prepare-depth" + with_cfg}};
  for (const char* stage : {"image", "segmenter", "tracker", "refiner"}) {
    steps.emplace_back(std::string("train ") + stage, " train" + with_cfg + " --stage " + stage);
  }
  const auto metrics = dir / "metrics.json";
  steps.emplace_back("eval", " eval" + with_cfg + " --ckpt '" + (dir / "run" / "checkpoints" / "refiner").string() +
                                 "' --offline --out '" + metrics.string() + "'");
  for (const auto& [name, args] : steps) {
    std::cerr << "  [11] " << name << std::endl;
    const int code = shell("'" + cli + "'" + args, log);
    if (code != 0) return {false, name + " exited with " + std::to_string(code) + " (log " + log.string() + ")"};
  }
  Checks checks;
  const auto m = core::read_json_file(metrics);
  checks.expect(m.value("videos", 0) == 10, "metrics cover " + m.value("videos", nlohmann::json()).dump() + " videos");
  for (const char* mode : {"online", "offline"}) {
    checks.expect(m.contains(mode), std::string("no ") + mode + " block");
    if (!m.contains(mode)) continue;
    for (const char* key : {"AP", "AP50", "AP75", "AR1", "AR10", "id_switches"}) {
      checks.expect(m[mode].contains(key) && m[mode][key].is_number(), std::string(mode) + "." + key);
    }
  }
  std::string summary = "7 commands exited 0";
  if (m.contains("online") && m.contains("offline")) {
    summary += "; online AP " + fmt(m["online"].value("AP", 0.0)) + ", offline AP " + fmt(m["offline"].value("AP", 0.0));
  }
  return checks.outcome(summary);
}

struct Criterion {
  int id;
  double budget_s;  // 0 means no runtime limit is checked
  std::function<Outcome(const fs::path&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"depthvis acceptance criteria"};
  std::vector<int> only;
  std::string results = (fs::temp_directory_path() / "depthvis_acceptance").string();
  bool reuse = false;
  app.add_option("--only", only, "Criteria to run (default all)")->delimiter(',');
  app.add_option("--results", results, "Scratch and run-cache directory");
  app.add_flag("--reuse", reuse, "Keep cached experiment runs from a previous invocation");
  CLI11_PARSE(app, argc, argv);

  const fs::path root(results);
  if (!reuse) fs::remove_all(root);
  fs::create_directories(root);

  // Budgets are the stated CPU runtimes; the short ones are generous upper bounds.
  const std::vector<Criterion> criteria{
      {1, 60, criterion_1},      {2, 300, criterion_2},     {3, 60, criterion_3},  {4, 60, criterion_4},
      {5, 60, criterion_5},      {6, 1800, criterion_6},    {7, 1200, criterion_7}, {8, 1800, criterion_8},
      {9, 300, criterion_9},     {10, 600, criterion_10},   {11, 900, criterion_11},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    std::cerr << "running criterion " << c.id << std::endl;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(root);
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += "; runtime " + fmt(secs, 4) + " s exceeds " + fmt(c.budget_s, 4) + " s";
    }
    failed += !o.pass;
    std::cout << "criterion " << c.id << ": " << (o.pass ? "PASS" : "FAIL") << " (" << fmt(secs, 4) << " s) "
              << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
