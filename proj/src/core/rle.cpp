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

#include "depthvis/core/rle.hpp"

#include <numeric>
#include <string>

#include "depthvis/core/error.hpp"

namespace depthvis::core {

Rle rle_encode(const BinaryMask& mask) {
  Rle rle{mask.height(), mask.width(), {}};
  uint8_t current = 0;
  uint32_t run = 0;
  for (int x = 0; x < mask.width(); ++x) {
    for (int y = 0; y < mask.height(); ++y) {
      const uint8_t v = mask.at(y, x);
      if (v != current) {
        rle.counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

BinaryMask rle_decode(const Rle& rle) {
  const uint64_t expected = static_cast<uint64_t>(rle.height) * rle.width;
  const uint64_t total = std::accumulate(rle.counts.begin(), rle.counts.end(), uint64_t{0});
  if (rle.height < 0 || rle.width < 0 || total != expected) {
    throw Error(ErrorKind::kSizeMismatch, "rle counts sum " + std::to_string(total) +
                                              " != " + std::to_string(expected));
  }
  BinaryMask mask(rle.height, rle.width);
  uint64_t pos = 0;
  bool value = false;
  for (uint32_t run : rle.counts) {
    for (uint32_t i = 0; i < run; ++i, ++pos) {
      if (value) {
        const int x = static_cast<int>(pos / rle.height);
        const int y = static_cast<int>(pos % rle.height);
        mask.set(y, x, true);
      }
    }
    value = !value;
  }
  return mask;
}

}  // namespace depthvis::core
