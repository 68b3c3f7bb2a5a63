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

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "depthvis/core/annotations.hpp"
#include "depthvis/core/image.hpp"

namespace depthvis::cli {

inline constexpr double kOverlayAlpha = 0.5;

// Fixed color of a track id (same id, same color, in every render).
std::array<std::uint8_t, 3> track_color(int track_id);

// Draws decimal digits with a 3x5 pixel font, top-left corner at (x, y).
void draw_number(core::RgbImage& img, int x, int y, int value, const std::array<std::uint8_t, 3>& color);
int number_width(int value);

// Blends every track mask into `frame` with its id color and labels it with the id.
void overlay_frame(core::RgbImage& frame, int t, const std::vector<core::InstanceTrack>& tracks);

// Reads <video_dir>/frames/frame_%06d.png, overlays the tracks and writes
// <out_dir>/frame_%06d.png with the frame index stamped top-right. Throws
// MissingFrame when a track refers to a frame that does not exist.
int render_overlays(const std::filesystem::path& video_dir, const std::vector<core::InstanceTrack>& tracks,
                    const std::filesystem::path& out_dir);

}  // namespace depthvis::cli
