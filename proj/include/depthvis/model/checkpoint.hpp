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
#include <memory>
#include <string>

#include "depthvis/model/model.hpp"

namespace depthvis::model {

// A checkpoint directory holds manifest.json
//   {"model": {...}, "stage": "...", "parameters": {name: {shape, dtype:"f32", file, frozen}}}
// and one little-endian float32 file per parameter.
void save_checkpoint(const VisModel& model, const std::string& stage, const std::filesystem::path& dir);

struct LoadedCheckpoint {
  std::unique_ptr<VisModel> model;
  std::string stage;
};

// Throws MissingPredecessor when the directory or manifest is absent and Io on
// malformed content.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace depthvis::model
