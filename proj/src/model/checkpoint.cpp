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

#include "depthvis/model/checkpoint.hpp"

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "depthvis/core/annotations.hpp"
#include "depthvis/core/error.hpp"

namespace depthvis::model {

namespace fs = std::filesystem;

namespace {

std::string file_name_for(const std::string& name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_') ? c : '_';
  return out + ".f32";
}

void write_f32(const fs::path& path, const nn::Tensor& t) {
  std::vector<char> bytes(t.numel() * 4);
  for (std::size_t i = 0; i < t.numel(); ++i) {
    uint32_t u = std::bit_cast<uint32_t>(static_cast<float>(t[i]));
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
    std::memcpy(bytes.data() + 4 * i, &u, 4);
  }
  std::ofstream f(path, std::ios::binary);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorKind::kIo, "cannot write " + path.string());
}

nn::Tensor read_f32(const fs::path& path, const std::vector<int>& shape) {
  nn::Tensor t(shape, 0.0);
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::vector<char> bytes(t.numel() * 4);
  f.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (f.gcount() != static_cast<std::streamsize>(bytes.size()) || f.peek() != EOF) {
    throw Error(ErrorKind::kIo, path.string() + " does not match its declared shape");
  }
  for (std::size_t i = 0; i < t.numel(); ++i) {
    uint32_t u = 0;
    std::memcpy(&u, bytes.data() + 4 * i, 4);
    if constexpr (std::endian::native == std::endian::big) u = __builtin_bswap32(u);
    t[i] = static_cast<double>(std::bit_cast<float>(u));
  }
  return t;
}

}  // namespace

void save_checkpoint(const VisModel& model, const std::string& stage, const fs::path& dir) {
  const fs::path parent = dir.has_parent_path() ? dir.parent_path() : fs::path(".");
  fs::create_directories(parent);
  const fs::path tmp = parent / (dir.filename().string() + ".tmp");
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  nlohmann::json params = nlohmann::json::object();
  for (const auto& p : model.params().entries()) {
    const std::string file = file_name_for(p.name);
    write_f32(tmp / file, p.var.value());
    params[p.name] = {{"shape", p.var.value().shape()}, {"dtype", "f32"}, {"file", file}, {"frozen", p.frozen}};
  }
  nlohmann::json manifest{{"model", to_json(model.config())}, {"stage", stage}, {"parameters", params}};
  core::write_json_file(tmp / "manifest.json", manifest, 2);
  fs::remove_all(dir);
  fs::rename(tmp, dir);
}

LoadedCheckpoint load_checkpoint(const fs::path& dir) {
  if (!fs::exists(dir / "manifest.json")) {
    throw Error(ErrorKind::kMissingPredecessor, "no checkpoint at " + dir.string());
  }
  const nlohmann::json manifest = core::read_json_file(dir / "manifest.json");
  LoadedCheckpoint out;
  try {
    out.model = std::make_unique<VisModel>(model_config_from_json(manifest.at("model")));
    out.stage = manifest.at("stage").get<std::string>();
    const auto& params = manifest.at("parameters");
    for (auto& p : out.model->params().entries()) {
      if (!params.contains(p.name)) throw Error(ErrorKind::kIo, "checkpoint lacks parameter " + p.name);
      const auto& e = params.at(p.name);
      if (e.at("dtype").get<std::string>() != "f32") throw Error(ErrorKind::kIo, "unsupported dtype");
      const auto shape = e.at("shape").get<std::vector<int>>();
      if (shape != p.var.value().shape()) {
        throw Error(ErrorKind::kShapeMismatch, "checkpoint shape mismatch for " + p.name);
      }
      p.var.mutable_value() = read_f32(dir / e.at("file").get<std::string>(), shape);
      p.frozen = e.at("frozen").get<bool>();
      p.var.set_requires_grad(!p.frozen);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kIo, std::string("malformed checkpoint manifest: ") + e.what());
  }
  return out;
}

}  // namespace depthvis::model
