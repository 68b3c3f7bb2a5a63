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

#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"

#include "depthvis/core/error.hpp"
#include "depthvis/depth/depth_map.hpp"
#include "depthvis/synth/scenario.hpp"
#include "depthvis/model/checkpoint.hpp"
#include "depthvis/model/model.hpp"
#include "depthvis/nn/autograd.hpp"
#include "depthvis/train/hungarian.hpp"
#include "depthvis/train/losses.hpp"

using namespace depthvis;
using model::ModelConfig;
using model::Variant;
using model::VisModel;
namespace fs = std::filesystem;

namespace {

ModelConfig tiny_config(Variant v, uint64_t seed = 5) {
  ModelConfig c;
  c.variant = v;
  c.backbone.in_channels = v == Variant::kEdc ? 4 : 3;
  c.backbone.widths = {8, 8, 16, 16};
  c.embed_dim = 16;
  c.ffn_dim = 32;
  c.depth_dim = 16;
  c.adapter.width = 8;
  c.num_queries = 8;
  c.num_classes = 3;
  c.seed = seed;
  return c;
}

model::FrameBatch random_batch(std::mt19937_64& rng, int b, int h, int w) {
  model::FrameBatch fb;
  fb.batch = b;
  fb.height = h;
  fb.width = w;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  fb.rgb.resize(static_cast<std::size_t>(b) * 3 * h * w);
  for (auto& x : fb.rgb) x = std::floor(u(rng) * 256.0);
  fb.depth.resize(static_cast<std::size_t>(b) * h * w);
  for (auto& x : fb.depth) x = u(rng);
  return fb;
}

double rel_diff(const nn::Tensor& a, const nn::Tensor& b) {
  double num = 0;
  double den = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / std::max(den, 1e-12);
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("depthvis_test_model_" + name);
  fs::remove_all(p);
  return p;
}

void check_same_outputs(const std::vector<model::FrameOutput>& a, const std::vector<model::FrameOutput>& b) {
  REQUIRE(a.size() == b.size());
  for (std::size_t t = 0; t < a.size(); ++t) {
    CHECK(a[t].class_logits.value().values() == b[t].class_logits.value().values());
    CHECK(a[t].mask_logits.value().values() == b[t].mask_logits.value().values());
    CHECK(a[t].query_embed.value().values() == b[t].query_embed.value().values());
  }
}

}  // namespace

TEST_CASE("expand_input_channels: zero and rgb_mean modes") {
  nn::Tensor w({2, 3, 1, 1}, {1, 2, 3, 4, 5, 6});
  const auto z = model::expand_input_channels(w, model::EdcInit::kZero);
  CHECK(z.shape() == std::vector<int>{2, 4, 1, 1});
  CHECK(z[0] == 1);
  CHECK(z[1] == 2);
  CHECK(z[2] == 3);
  CHECK(z[3] == 0);
  CHECK(z[4] == 4);
  CHECK(z[7] == 0);
  const auto m = model::expand_input_channels(w, model::EdcInit::kRgbMean);
  CHECK(m[3] == 2);
  CHECK(m[7] == 5);
  try {
    model::expand_input_channels(nn::Tensor({2, 4, 1, 1}), model::EdcInit::kZero);
    FAIL("expected BadShape");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kBadShape);
  }
}

TEST_CASE("edc zero surgery reproduces the rgb model for any depth") {
  std::mt19937_64 rng(1);
  VisModel rgb(tiny_config(Variant::kRgbBaseline));
  const auto edc = model::convert_to_edc(rgb, model::EdcInit::kZero);
  CHECK(edc->config().variant == Variant::kEdc);
  CHECK(edc->params().get(edc->input_layer_name()).dim(1) == 4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto batch = random_batch(rng, 1, 32, 32);
    const auto a = rgb.forward(batch);
    const auto b = edc->forward(batch);
    CHECK(rel_diff(b[0].class_logits.value(), a[0].class_logits.value()) <= 1e-5);
    CHECK(rel_diff(b[0].mask_logits.value(), a[0].mask_logits.value()) <= 1e-5);
  }
  // rgb_mean surgery makes the depth channel matter.
  const auto mean = model::convert_to_edc(rgb, model::EdcInit::kRgbMean);
  const auto batch = random_batch(rng, 1, 32, 32);
  CHECK(rel_diff(mean->forward(batch)[0].mask_logits.value(), rgb.forward(batch)[0].mask_logits.value()) > 1e-6);
}

TEST_CASE("forward output shapes and class normalisation") {
  std::mt19937_64 rng(2);
  auto cfg = tiny_config(Variant::kEdc);
  VisModel m(cfg);
  const auto out = m.forward(random_batch(rng, 2, 64, 64));
  REQUIRE(out.size() == 2);
  for (const auto& o : out) {
    CHECK(o.class_logits.shape() == std::vector<int>{8, 4});
    CHECK(o.mask_h == 16);
    CHECK(o.mask_w == 16);
    CHECK(o.mask_logits.shape() == std::vector<int>{8, 256});
    CHECK(o.pixel_features.dim(1) == cfg.embed_dim);
    CHECK(o.query_embed.dim(1) == cfg.embed_dim);
    const auto p = nn::softmax_rows(o.class_logits).value();
    for (int i = 0; i < 8; ++i) {
      double s = 0;
      for (int c = 0; c < 4; ++c) s += p.at(i, c);
      CHECK(std::abs(s - 1.0) <= 1e-6);
    }
    // Mask logits are dot products of mask embeddings and pixel features.
    const auto& me = o.mask_embed.value();
    const auto& pf = o.pixel_features.value();
    for (int i = 0; i < 8; i += 3) {
      for (int k = 0; k < 256; k += 37) {
        double dot = 0;
        for (int e = 0; e < cfg.embed_dim; ++e) dot += me.at(i, e) * pf.at(k, e);
        CHECK(std::abs(dot - o.mask_logits.value().at(i, k)) <= 1e-9 * std::max(1.0, std::abs(dot)));
      }
    }
  }
}

TEST_CASE("variant configuration invariants") {
  auto c = tiny_config(Variant::kEdc);
  c.backbone.in_channels = 3;
  CHECK_THROWS_AS(model::validate(c), Error);
  c = tiny_config(Variant::kRgbBaseline);
  c.backbone.widths = {8};
  c.backbone.depths = {1};
  CHECK_THROWS_AS(model::validate(c), Error);
  c = tiny_config(Variant::kSv);
  c.adapter.injector = true;
  CHECK_THROWS_AS(model::validate(c), Error);
  CHECK(model::model_config_from_json(model::to_json(tiny_config(Variant::kDsQuery))) ==
        tiny_config(Variant::kDsQuery));
}

TEST_CASE("shared-backbone model: frozen backbone, 4-channel spatial prior, no injector") {
  std::mt19937_64 rng(3);
  VisModel depth_model(tiny_config(Variant::kDs));
  CHECK_THROWS_AS(model::build_sv_model(depth_model, {8, false}, tiny_config(Variant::kSv)), Error);
  depth_model.params().set_frozen(model::kBackbonePrefix, true);
  depth_model.params().set_frozen(model::kDepthHeadPrefix, true);
  try {
    model::build_sv_model(depth_model, {8, true}, tiny_config(Variant::kSv));
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfigError);
  }
  auto sv = model::build_sv_model(depth_model, {8, false}, tiny_config(Variant::kSv));
  CHECK(sv->params().get(VisModel::kSpatialPriorInput).dim(1) == 4);
  for (const auto& p : sv->params().entries()) {
    const bool shared = p.name.rfind("backbone.", 0) == 0 || p.name.rfind("depth_head.", 0) == 0;
    CHECK(p.frozen == shared);
    if (shared) CHECK(p.var.value().values() == depth_model.params().get(p.name).value().values());
  }
  // One optimizer step on a segmentation loss leaves the shared parameters untouched.
  std::map<std::string, std::vector<double>> before;
  for (const auto& p : sv->params().entries()) before[p.name] = p.var.value().values();
  const auto batch = random_batch(rng, 1, 32, 32);
  const auto out = sv->forward(batch);
  nn::backward(nn::add(nn::mean_all(out[0].mask_logits), nn::mean_all(out[0].class_logits)));
  nn::AdamW opt({1e-2, 5e-2});
  opt.step(sv->params());
  int changed = 0;
  for (const auto& p : sv->params().entries()) {
    if (p.frozen) {
      CHECK(p.var.value().values() == before[p.name]);
    } else {
      changed += p.var.value().values() != before[p.name];
    }
  }
  CHECK(changed > 0);
  CHECK(sv->forward(batch)[0].depth.shape() == std::vector<int>{1, 1, 32, 32});
}

TEST_CASE("depth head overfits one frame under the SSI loss") {
  synth::ScenarioSpec spec;
  spec.kind = synth::ScenarioKind::kCrossing;
  spec.seed = 4;
  const auto video = synth::generate_scenario(spec, 0);
  const int t = 3;
  model::FrameBatch batch;
  batch.batch = 1;
  batch.height = spec.height;
  batch.width = spec.width;
  batch.rgb.assign(video.frames[t].data.begin(), video.frames[t].data.end());
  const auto target = depth::normalize_depth(video.gt.depth[t]);
  auto dcfg = tiny_config(Variant::kDs);
  dcfg.backbone.widths = {16, 32, 48, 64};
  dcfg.depth_dim = 32;
  VisModel m(dcfg);
  m.params().freeze_all_except({model::kBackbonePrefix, model::kDepthHeadPrefix});
  nn::AdamW opt({3e-3, 0.0});
  double first = 0;
  double last = 0;
  for (int step = 0; step < 200; ++step) {
    m.params().zero_grad();
    const auto loss = train::depth_loss_ssi(m.predict_depth(batch), target);
    if (step == 0) first = loss.value()[0];
    last = loss.value()[0];
    nn::backward(loss);
    opt.step(m.params());
  }
  CAPTURE(first);
  CHECK(last < 0.05);
  CHECK(last < first);
}

TEST_CASE("auxiliary depth heads leave segmentation untouched at initialisation") {
  std::mt19937_64 rng(5);
  const auto batch = random_batch(rng, 2, 32, 32);
  VisModel base(tiny_config(Variant::kRgbBaseline));
  VisModel ds(tiny_config(Variant::kDs));
  VisModel dsq(tiny_config(Variant::kDsQuery));
  const auto a = base.forward(batch);
  check_same_outputs(a, ds.forward(batch));
  check_same_outputs(a, dsq.forward(batch));
  CHECK(ds.forward(batch)[0].depth.shape() == std::vector<int>{1, 1, 32, 32});
  CHECK(ds.predict_depth(batch).shape() == std::vector<int>{2, 1, 32, 32});
}

TEST_CASE("per-query depth decoding is ds_query only") {
  std::mt19937_64 rng(6);
  const auto batch = random_batch(rng, 1, 32, 32);
  VisModel dsq(tiny_config(Variant::kDsQuery));
  const auto out = dsq.forward(batch);
  const auto qd = dsq.decode_query_depth(out[0].query_embed, out[0].pixel_features);
  CHECK(qd.shape() == std::vector<int>{8, 8 * 8});
  CHECK(out[0].query_depth.shape() == std::vector<int>{8, 64});
  VisModel ds(tiny_config(Variant::kDs));
  const auto o2 = ds.forward(batch);
  try {
    ds.decode_query_depth(o2[0].query_embed, o2[0].pixel_features);
    FAIL("expected VariantMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kVariantMismatch);
  }
  VisModel rgb(tiny_config(Variant::kRgbBaseline));
  CHECK_THROWS_AS(rgb.predict_depth(batch), Error);
}

TEST_CASE("initialisation is bit-stable for a fixed seed") {
  VisModel a(tiny_config(Variant::kSv, 9));
  VisModel b(tiny_config(Variant::kSv, 9));
  VisModel c(tiny_config(Variant::kSv, 10));
  bool any_diff = false;
  for (const auto& p : a.params().entries()) {
    CHECK(p.var.value().values() == b.params().get(p.name).value().values());
    any_diff |= p.var.value().values() != c.params().get(p.name).value().values();
  }
  CHECK(any_diff);
}

TEST_CASE("checkpoint round trip is byte exact and keeps frozen flags") {
  const auto dir = scratch("ckpt");
  VisModel m(tiny_config(Variant::kSv, 3));
  m.params().set_frozen("decoder.", true);
  model::save_checkpoint(m, "segmenter", dir);
  const auto loaded = model::load_checkpoint(dir);
  CHECK(loaded.stage == "segmenter");
  CHECK(loaded.model->config() == m.config());
  for (const auto& p : m.params().entries()) {
    const auto& q = loaded.model->params().entry(p.name);
    CHECK(q.frozen == p.frozen);
    CHECK(q.var.value().shape() == p.var.value().shape());
    CHECK(q.var.value().values() == p.var.value().values());
  }
  // Saving the reloaded model yields identical bytes.
  const auto dir2 = scratch("ckpt2");
  model::save_checkpoint(*loaded.model, "segmenter", dir2);
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::ifstream f1(entry.path(), std::ios::binary);
    std::ifstream f2(dir2 / entry.path().filename(), std::ios::binary);
    const std::string s1((std::istreambuf_iterator<char>(f1)), {});
    const std::string s2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(s1 == s2);
  }
  try {
    model::load_checkpoint(scratch("missing"));
    FAIL("expected MissingPredecessor");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kMissingPredecessor);
  }
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("total loss gradient matches central differences on a 2-query toy instance") {
  auto cfg = tiny_config(Variant::kEdc, 11);
  cfg.num_queries = 2;
  cfg.backbone.widths = {4, 4, 8, 8};
  cfg.embed_dim = 8;
  cfg.ffn_dim = 8;
  VisModel m(cfg);
  std::mt19937_64 rng(12);
  // 32x32 input gives 8x8 masks.
  const auto batch = random_batch(rng, 1, 32, 32);
  train::GtInstance gt{1, 1, core::BinaryMask(32, 32)};
  for (int y = 8; y < 20; ++y) {
    for (int x = 6; x < 18; ++x) gt.mask.set(y, x, true);
  }
  const std::vector<train::GtInstance> gts{gt};
  train::Matching match;
  auto total_loss = [&] {
    const auto out = m.forward(batch);
    const auto up = train::upsample_mask_logits(out[0].mask_logits, out[0].mask_h, out[0].mask_w, 32, 32);
    if (match.pairs.empty()) {
      match = train::hungarian_match(train::matching_cost(out[0].class_logits.value(), up.value(), gts));
    }
    return train::segmentation_loss(out[0].class_logits, up, gts, match).total;
  };
  m.params().zero_grad();
  nn::backward(total_loss());
  std::mt19937_64 pick(13);
  int checked = 0;
  int agree = 0;
  for (auto& p : m.params().entries()) {
    if (p.frozen || p.var.grad().empty()) continue;
    if (p.name.rfind("tracker.", 0) == 0 || p.name.rfind("refiner.", 0) == 0) continue;
    for (int s = 0; s < 2; ++s) {
      const std::size_t i = pick() % p.var.value().numel();
      const double analytic = p.var.grad()[i];
      const double orig = p.var.value()[i];
      const double eps = 1e-4;
      double lp = 0;
      double lm = 0;
      {
        nn::NoGradGuard guard;
        p.var.mutable_value()[i] = orig + eps;
        lp = total_loss().value()[0];
        p.var.mutable_value()[i] = orig - eps;
        lm = total_loss().value()[0];
        p.var.mutable_value()[i] = orig;
      }
      const double numeric = (lp - lm) / (2 * eps);
      ++checked;
      const bool ok = std::abs(numeric - analytic) <= 1e-3 * std::max(std::abs(numeric), std::abs(analytic)) + 1e-7;
      agree += ok;
      if (!ok) MESSAGE(p.name << "[" << i << "] numeric " << numeric << " analytic " << analytic);
    }
  }
  CHECK(checked > 20);
  // ReLU kinks can make an isolated probe disagree; nearly all must match.
  CHECK(agree >= checked - 1);
}
