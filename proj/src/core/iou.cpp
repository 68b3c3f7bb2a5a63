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

#include "depthvis/core/iou.hpp"

#include <string>

#include "depthvis/core/error.hpp"

namespace depthvis::core {

Overlap mask_overlap(const BinaryMask& a, const BinaryMask& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw Error(ErrorKind::kShapeMismatch,
                "mask " + std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                    " vs " + std::to_string(b.height()) + "x" + std::to_string(b.width()));
  }
  Overlap o;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    o.intersection += da[i] & db[i];
    o.union_ += da[i] | db[i];
  }
  return o;
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  const Overlap o = mask_overlap(a, b);
  if (o.union_ == 0) return 0.0;
  return static_cast<double>(o.intersection) / static_cast<double>(o.union_);
}

double tube_iou(std::span<const std::optional<BinaryMask>> a,
                std::span<const std::optional<BinaryMask>> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kShapeMismatch, "tube lengths " + std::to_string(a.size()) +
                                               " vs " + std::to_string(b.size()));
  }
  uint64_t inter = 0;
  uint64_t uni = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t] && b[t]) {
      const Overlap o = mask_overlap(*a[t], *b[t]);
      inter += o.intersection;
      uni += o.union_;
    } else if (a[t]) {
      uni += a[t]->area();
    } else if (b[t]) {
      uni += b[t]->area();
    }
  }
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace depthvis::core
