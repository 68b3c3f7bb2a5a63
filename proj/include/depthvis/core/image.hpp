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
#include <filesystem>
#include <vector>

namespace depthvis::core {

// 8-bit RGB frame stored channel-first (3 x H x W), the layout the models consume.
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> data;

  RgbImage() = default;
  RgbImage(int h, int w) : height(h), width(w), data(static_cast<std::size_t>(3) * h * w, 0) {}

  uint8_t& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  uint8_t at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  bool operator==(const RgbImage&) const = default;
};

struct Gray16Image {
  int height = 0;
  int width = 0;
  std::vector<uint16_t> data;
};

void write_png_rgb(const std::filesystem::path& path, const RgbImage& image);
RgbImage read_png_rgb(const std::filesystem::path& path);

void write_png_gray16(const std::filesystem::path& path, const Gray16Image& image);
Gray16Image read_png_gray16(const std::filesystem::path& path);

}  // namespace depthvis::core
