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

#include "depthvis/depth/depth_cache.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>

#include "json.hpp"

#include "depthvis/core/annotations.hpp"
#include "depthvis/core/error.hpp"

namespace depthvis::depth {

namespace fs = std::filesystem;

namespace {

constexpr double kLevels = 65535.0;

std::string frame_name(std::size_t t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06zu.png", t);
  return buf;
}

std::size_t count_frame_files(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("frame_", 0) == 0 && entry.path().extension() == ".png") ++n;
  }
  return n;
}

}  // namespace

void write_depth_cache(const std::vector<DepthMap>& depths, const fs::path& dir) {
  fs::create_directories(dir);
  nlohmann::json frames = nlohmann::json::array();
  std::string source = depths.empty() ? "cache" : to_string(depths.front().source);
  for (std::size_t t = 0; t < depths.size(); ++t) {
    const auto& d = depths[t];
    core::Gray16Image img{d.height, d.width, std::vector<uint16_t>(d.values.size(), 0)};
    const double range = d.max - d.min;
    if (range > 0.0) {
      for (std::size_t i = 0; i < d.values.size(); ++i) {
        const double q = std::round((d.values[i] - d.min) / range * kLevels);
        img.data[i] = static_cast<uint16_t>(std::clamp(q, 0.0, kLevels));
      }
    }
    core::write_png_gray16(dir / frame_name(t), img);
    frames.push_back({{"min", d.min}, {"max", d.max}});
  }
  core::write_json_file(dir / "depth_meta.json", {{"frames", frames}, {"source", source}});
}

std::vector<DepthMap> read_depth_cache(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorKind::kCorruptCache, "missing cache directory " + dir.string());
  }
  nlohmann::json meta;
  try {
    meta = core::read_json_file(dir / "depth_meta.json");
  } catch (const Error& e) {
    throw Error(ErrorKind::kCorruptCache, e.what());
  }
  if (!meta.contains("frames") || !meta["frames"].is_array()) {
    throw Error(ErrorKind::kCorruptCache, "depth_meta.json lacks a frames array");
  }
  const auto& frames = meta["frames"];
  const std::size_t on_disk = count_frame_files(dir);
  if (on_disk != frames.size()) {
    throw Error(ErrorKind::kCorruptCache, "sidecar lists " + std::to_string(frames.size()) +
                                              " frames but directory holds " +
                                              std::to_string(on_disk));
  }
  const DepthSource source = depth_source_from_string(meta.value("source", std::string("cache")));
  std::vector<DepthMap> out;
  out.reserve(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const fs::path path = dir / frame_name(t);
    if (!fs::exists(path)) throw Error(ErrorKind::kCorruptCache, "missing " + path.string());
    core::Gray16Image img;
    try {
      img = core::read_png_gray16(path);
    } catch (const Error& e) {
      throw Error(ErrorKind::kCorruptCache, e.what());
    }
    DepthMap d;
    d.height = img.height;
    d.width = img.width;
    d.min = frames[t].at("min").get<double>();
    d.max = frames[t].at("max").get<double>();
    d.source = source;
    d.values.resize(img.data.size());
    const double range = d.max - d.min;
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      d.values[i] = range > 0.0 ? std::min(d.max, d.min + (img.data[i] / kLevels) * range) : d.min;
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<DepthMap> estimate_depth_external(const fs::path& frames_dir,
                                              const std::string& estimator_command,
                                              const fs::path& work_dir) {
  const fs::path cache = work_dir / "estimator_output";
  fs::remove_all(cache);
  fs::create_directories(work_dir);
  const std::string cmd = estimator_command + " --input '" + frames_dir.string() +
                          "' --output '" + cache.string() + "'";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw Error(ErrorKind::kEstimatorFailed,
                "estimator command failed (status " + std::to_string(status) + "): " + cmd);
  }
  std::vector<DepthMap> maps;
  try {
    maps = read_depth_cache(cache);
  } catch (const Error& e) {
    throw Error(ErrorKind::kEstimatorFailed, std::string("malformed estimator output: ") + e.what());
  }
  for (auto& d : maps) d.source = DepthSource::kExternalEstimator;
  return maps;
}

}  // namespace depthvis::depth
