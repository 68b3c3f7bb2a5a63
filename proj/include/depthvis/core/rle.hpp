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
#include <vector>

#include "depthvis/core/mask.hpp"

namespace depthvis::core {

// Uncompressed COCO run-length encoding: column-major runs, first run counts zeros.
struct Rle {
  int height = 0;
  int width = 0;
  std::vector<uint32_t> counts;

  bool operator==(const Rle&) const = default;
};

Rle rle_encode(const BinaryMask& mask);

// Throws SizeMismatch when the runs do not cover height*width pixels exactly.
BinaryMask rle_decode(const Rle& rle);

}  // namespace depthvis::core
