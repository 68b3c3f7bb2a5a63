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

#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "depthvis/core/annotations.hpp"
#include "depthvis/core/error.hpp"
#include "depthvis/core/iou.hpp"
#include "depthvis/core/mask.hpp"
#include "depthvis/core/rle.hpp"

using namespace depthvis;
using core::BinaryMask;

namespace {

BinaryMask random_mask(std::mt19937_64& rng, int h, int w, double p) {
  std::bernoulli_distribution bit(p);
  BinaryMask m(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(y, x, bit(rng));
  }
  return m;
}

}  // namespace

TEST_CASE("rle: all-zero and all-one 2x2 masks") {
  BinaryMask zeros(2, 2);
  CHECK(core::rle_encode(zeros).counts == std::vector<uint32_t>{4});
  BinaryMask ones(2, 2, {1, 1, 1, 1});
  CHECK(core::rle_encode(ones).counts == std::vector<uint32_t>{0, 4});
}

TEST_CASE("rle: decode examples") {
  CHECK(core::rle_decode({2, 2, {4}}) == BinaryMask(2, 2));
  // Column-major 0,1,1,0: (0,0)=0, (1,0)=1, (0,1)=1, (1,1)=0.
  const BinaryMask m = core::rle_decode({2, 2, {1, 2, 1}});
  CHECK(m.at(0, 0) == 0);
  CHECK(m.at(1, 0) == 1);
  CHECK(m.at(0, 1) == 1);
  CHECK(m.at(1, 1) == 0);
  CHECK_THROWS_AS(core::rle_decode({2, 2, {3}}), Error);
  try {
    core::rle_decode({2, 2, {3}});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kSizeMismatch);
  }
}

TEST_CASE("rle: 1000 random masks round-trip and satisfy the run invariants") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> dim(1, 16);
  std::uniform_real_distribution<double> dens(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const int h = dim(rng);
    const int w = dim(rng);
    const BinaryMask m = random_mask(rng, h, w, dens(rng));
    const core::Rle r = core::rle_encode(m);
    CHECK(core::rle_decode(r) == m);
    std::uint64_t total = 0;
    for (auto c : r.counts) total += c;
    CHECK(total == static_cast<std::uint64_t>(h * w));
    for (std::size_t k = 1; k < r.counts.size(); ++k) CHECK(r.counts[k] > 0);
    // Oracle: column-major pixel order.
    const auto flat = testing::expand_runs(r.counts);
    for (int x = 0; x < w; ++x) {
      for (int y = 0; y < h; ++y) REQUIRE(flat[x * h + y] == m.at(y, x));
    }
  }
}

TEST_CASE("mask_iou: examples, symmetry and shape errors") {
  BinaryMask a(2, 2, {1, 1, 0, 0});
  BinaryMask b(2, 2, {0, 1, 1, 0});
  CHECK(core::mask_iou(a, a) == 1.0);
  CHECK(core::mask_iou(a, BinaryMask(2, 2, {0, 0, 1, 1})) == 0.0);
  CHECK(core::mask_iou(a, b) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(core::mask_iou(a, b) == core::mask_iou(b, a));
  CHECK(core::mask_iou(BinaryMask(2, 2), BinaryMask(2, 2)) == 0.0);
  CHECK_THROWS_AS(core::mask_iou(a, BinaryMask(3, 2)), Error);
}

TEST_CASE("tube_iou: two-frame example and single-frame consistency") {
  core::MaskTrack a{BinaryMask(2, 2, {1, 1, 0, 0}), BinaryMask(2, 2, {1, 1, 0, 0})};
  core::MaskTrack b{BinaryMask(2, 2, {0, 1, 1, 0}), BinaryMask(2, 2, {1, 1, 0, 0})};
  CHECK(core::tube_iou(a, b) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(core::tube_iou(a, a) == 1.0);
  core::MaskTrack one_a{a[0]};
  core::MaskTrack one_b{b[0]};
  CHECK(core::tube_iou(one_a, one_b) == core::mask_iou(*a[0], *b[0]));
  core::MaskTrack absent{std::nullopt, std::nullopt};
  CHECK(core::tube_iou(absent, absent) == 0.0);
}

TEST_CASE("tube_iou: random 5-frame tracks equal a per-pixel brute force") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int h = 1 + static_cast<int>(rng() % 12);
    const int w = 1 + static_cast<int>(rng() % 12);
    core::MaskTrack a(5);
    core::MaskTrack b(5);
    for (int t = 0; t < 5; ++t) {
      if (rng() % 4) a[t] = random_mask(rng, h, w, 0.4);
      if (rng() % 4) b[t] = random_mask(rng, h, w, 0.4);
    }
    const double expect = testing::brute_tube_iou(a, b);
    CHECK(std::abs(core::tube_iou(a, b) - expect) <= 1e-12);
    CHECK(core::tube_iou(a, b) == core::tube_iou(b, a));
    const double v = core::tube_iou(a, b);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("annotations: dataset and prediction JSON round trip") {
  core::Dataset ds;
  ds.videos.push_back({1, 4, 3, 2, {"a.png", "b.png"}});
  ds.categories.push_back({1, "disk"});
  core::VideoAnnotation ann;
  ann.id = 5;
  ann.video_id = 1;
  ann.category_id = 1;
  ann.instance_id = 9;
  ann.segmentations = {core::rle_encode(BinaryMask(3, 4, std::vector<uint8_t>(12, 1))), std::nullopt};
  ds.annotations.push_back(ann);
  const auto back = core::dataset_from_json(core::dataset_to_json(ds));
  CHECK(core::dataset_to_json(back) == core::dataset_to_json(ds));
  CHECK(back.annotations[0].segmentations[1] == std::nullopt);

  core::Prediction p{1, 1, 0.5, ann.segmentations, 3};
  const auto preds = core::predictions_from_json(core::predictions_to_json({p}));
  REQUIRE(preds.size() == 1);
  CHECK(preds[0].score == 0.5);
  CHECK(preds[0].segmentations == p.segmentations);
}
