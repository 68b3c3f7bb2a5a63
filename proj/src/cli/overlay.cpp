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

#include "depthvis/cli/overlay.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "depthvis/core/error.hpp"
#include "depthvis/nn/parameters.hpp"
#include "depthvis/synth/scenario.hpp"

namespace depthvis::cli {

namespace fs = std::filesystem;

namespace {

// Rows of a 3x5 glyph, most significant bit on the left.
constexpr std::uint8_t kDigits[10][5] = {
    {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7}, {5, 5, 7, 1, 1},
    {7, 4, 7, 1, 7}, {7, 4, 7, 5, 7}, {7, 1, 1, 1, 1}, {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7},
};

void put(core::RgbImage& img, int x, int y, const std::array<std::uint8_t, 3>& c) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  for (int ch = 0; ch < 3; ++ch) img.at(ch, y, x) = c[ch];
}

}  // namespace

std::array<std::uint8_t, 3> track_color(int track_id) {
  const std::uint64_t h = nn::splitmix64(static_cast<std::uint64_t>(track_id) * 0x9e3779b97f4a7c15ULL);
  const double hue = static_cast<double>(h % 360);
  const double s = 0.75;
  const double v = 1.0;
  const double c = v * s;
  const double x = c * (1.0 - std::fabs(std::fmod(hue / 60.0, 2.0) - 1.0));
  double r = 0;
  double g = 0;
  double b = 0;
  switch (static_cast<int>(hue / 60.0)) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  const double m = v - c;
  auto to8 = [m](double u) { return static_cast<std::uint8_t>(std::lround((u + m) * 255.0)); };
  return {to8(r), to8(g), to8(b)};
}

int number_width(int value) { return static_cast<int>(std::to_string(value).size()) * 4 - 1; }

void draw_number(core::RgbImage& img, int x, int y, int value, const std::array<std::uint8_t, 3>& color) {
  const std::string digits = std::to_string(value);
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (digits[i] < '0' || digits[i] > '9') continue;
    const auto& glyph = kDigits[digits[i] - '0'];
    for (int row = 0; row < 5; ++row) {
      for (int col = 0; col < 3; ++col) {
        if (glyph[row] & (4 >> col)) put(img, x + static_cast<int>(i) * 4 + col, y + row, color);
      }
    }
  }
}

void overlay_frame(core::RgbImage& frame, int t, const std::vector<core::InstanceTrack>& tracks) {
  for (const auto& track : tracks) {
    if (t >= static_cast<int>(track.masks.size()) || !track.masks[t]) continue;
    const auto& mask = *track.masks[t];
    if (mask.height() != frame.height || mask.width() != frame.width) {
      throw Error(ErrorKind::kShapeMismatch, "track mask does not match the frame size");
    }
    const auto color = track_color(track.track_id);
    int min_x = frame.width;
    int min_y = frame.height;
    for (int y = 0; y < frame.height; ++y) {
      for (int x = 0; x < frame.width; ++x) {
        if (!mask.at(y, x)) continue;
        min_x = std::min(min_x, x);
        min_y = std::min(min_y, y);
        for (int ch = 0; ch < 3; ++ch) {
          const double blended = (1.0 - kOverlayAlpha) * frame.at(ch, y, x) + kOverlayAlpha * color[ch];
          frame.at(ch, y, x) = static_cast<std::uint8_t>(std::lround(blended));
        }
      }
    }
    if (min_x < frame.width) draw_number(frame, min_x + 1, min_y + 1, track.track_id, {255, 255, 255});
  }
}

int render_overlays(const fs::path& video_dir, const std::vector<core::InstanceTrack>& tracks,
                    const fs::path& out_dir) {
  const fs::path frames = video_dir / "frames";
  int count = 0;
  while (fs::exists(frames / synth::frame_file_name(count))) ++count;
  for (const auto& track : tracks) {
    for (std::size_t t = 0; t < track.masks.size(); ++t) {
      if (track.masks[t] && static_cast<int>(t) >= count) {
        throw Error(ErrorKind::kMissingFrame, "track " + std::to_string(track.track_id) + " refers to frame " +
                                                  std::to_string(t) + " but " + frames.string() + " has " +
                                                  std::to_string(count) + " frames");
      }
    }
  }
  if (count == 0) throw Error(ErrorKind::kMissingFrame, "no frames under " + frames.string());
  fs::create_directories(out_dir);
  for (int t = 0; t < count; ++t) {
    core::RgbImage img = core::read_png_rgb(frames / synth::frame_file_name(t));
    overlay_frame(img, t, tracks);
    draw_number(img, img.width - 1 - number_width(t), 1, t, {255, 255, 255});
    core::write_png_rgb(out_dir / synth::frame_file_name(t), img);
  }
  return count;
}

}  // namespace depthvis::cli
