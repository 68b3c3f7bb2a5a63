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

#include "depthvis/core/mask.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "depthvis/core/error.hpp"

namespace depthvis::core {

BinaryMask::BinaryMask(int height, int width)
    : height_(height), width_(width),
      data_(static_cast<std::size_t>(std::max(height, 0)) * std::max(width, 0), 0) {
  if (height < 0 || width < 0) {
    throw Error(ErrorKind::kShapeMismatch, "negative mask dimensions");
  }
}

BinaryMask::BinaryMask(int height, int width, std::vector<uint8_t> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (height < 0 || width < 0 ||
      data_.size() != static_cast<std::size_t>(height) * width) {
    throw Error(ErrorKind::kSizeMismatch,
                "mask data length " + std::to_string(data_.size()) + " != " +
                    std::to_string(height) + "x" + std::to_string(width));
  }
  for (auto& v : data_) {
    if (v > 1) {
      throw Error(ErrorKind::kShapeMismatch, "mask values must be 0 or 1");
    }
  }
}

std::size_t BinaryMask::area() const {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), uint8_t{1}));
}

}  // namespace depthvis::core
