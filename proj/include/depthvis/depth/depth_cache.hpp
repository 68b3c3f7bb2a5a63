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

#include <filesystem>
#include <string>
#include <vector>

#include "depthvis/depth/depth_map.hpp"

namespace depthvis::depth {

// Directory of frame_%06d.png 16-bit images plus depth_meta.json:
//   {"frames":[{"min":float,"max":float}], "source":string}
// Pixel p decodes to min + (p / 65535) * (max - min).
void write_depth_cache(const std::vector<DepthMap>& depths, const std::filesystem::path& dir);

// Throws CorruptCache when the sidecar disagrees with the image files.
std::vector<DepthMap> read_depth_cache(const std::filesystem::path& dir);

// Runs `command --input <frames_dir> --output <tmp cache>` and reads the result.
// Throws EstimatorFailed on nonzero exit or a malformed cache.
std::vector<DepthMap> estimate_depth_external(const std::filesystem::path& frames_dir,
                                              const std::string& estimator_command,
                                              const std::filesystem::path& work_dir);

}  // namespace depthvis::depth
