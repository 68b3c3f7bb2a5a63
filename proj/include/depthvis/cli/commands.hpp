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

#include <string>
#include <vector>

namespace depthvis::cli {

// Entry point of the depthvis tool: 0 on success, 1 on validation or usage
// errors, 2 on runtime failures.
int run_cli(int argc, char** argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace depthvis::cli
