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

#include <stdexcept>
#include <string>

namespace depthvis {

// Error categories surfaced by the library. The CLI maps kValidation errors to
// exit code 1 and everything else to exit code 2.
enum class ErrorKind {
  kSizeMismatch,
  kShapeMismatch,
  kInvalidSpec,
  kNonFiniteDepth,
  kCorruptCache,
  kEstimatorFailed,
  kBadShape,
  kConfigError,
  kVariantMismatch,
  kDimensionMismatch,
  kEmptyVideo,
  kNonFiniteCost,
  kInsufficientPixels,
  kMissingPredecessor,
  kStageOrderViolation,
  kUnknownCategory,
  kMissingFrame,
  kIo,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

  // Input or configuration problems, as opposed to runtime failures.
  bool is_validation() const;

 private:
  ErrorKind kind_;
};

}  // namespace depthvis
