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
#include <optional>
#include <span>

#include "depthvis/core/mask.hpp"

namespace depthvis::core {

struct Overlap {
  std::uint64_t intersection = 0;
  std::uint64_t union_ = 0;
};

Overlap mask_overlap(const BinaryMask& a, const BinaryMask& b);

// |a∩b| / |a∪b|, and 0 when both masks are empty.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

// Summed intersections over summed unions; absent frames count as empty masks.
double tube_iou(std::span<const std::optional<BinaryMask>> a,
                std::span<const std::optional<BinaryMask>> b);

}  // namespace depthvis::core
