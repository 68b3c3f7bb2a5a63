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

// Stand-in for an external monocular depth estimator, used to exercise the
// estimator adapter contract: --input <frames_dir> --output <cache_dir>.
#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"

#include "depthvis/core/image.hpp"
#include "depthvis/depth/depth_cache.hpp"
#include "depthvis/synth/scenario.hpp"

namespace fs = std::filesystem;
using namespace depthvis;

int main(int argc, char** argv) {
  CLI::App app{"fake depth estimator"};
  std::string input;
  std::string output;
  std::string mode = "gt";
  double value = 1.0;
  app.add_option("--input", input)->required();
  app.add_option("--output", output)->required();
  app.add_option("--mode", mode, "gt (copy <input>/../depth) | constant | fail | corrupt");
  app.add_option("--value", value, "Depth value for constant mode");
  CLI11_PARSE(app, argc, argv);
  try {
    if (mode == "fail") return 3;
    std::vector<depth::DepthMap> maps;
    if (mode == "gt") {
      maps = depth::read_depth_cache(fs::path(input).parent_path() / "depth");
    } else {
      for (int t = 0; fs::exists(fs::path(input) / synth::frame_file_name(t)); ++t) {
        const auto img = core::read_png_rgb(fs::path(input) / synth::frame_file_name(t));
        maps.push_back(depth::make_depth_map(img.height, img.width,
                                             std::vector<double>(std::size_t(img.height) * img.width, value),
                                             depth::DepthSource::kExternalEstimator));
      }
    }
    depth::write_depth_cache(maps, output);
    if (mode == "corrupt") fs::remove(fs::path(output) / synth::frame_file_name(0));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fake estimator: %s\n", e.what());
    return 2;
  }
  return 0;
}
