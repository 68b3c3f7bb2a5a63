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

#include "depthvis/core/error.hpp"

namespace depthvis {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSizeMismatch: return "SizeMismatch";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kInvalidSpec: return "InvalidSpec";
    case ErrorKind::kNonFiniteDepth: return "NonFiniteDepth";
    case ErrorKind::kCorruptCache: return "CorruptCache";
    case ErrorKind::kEstimatorFailed: return "EstimatorFailed";
    case ErrorKind::kBadShape: return "BadShape";
    case ErrorKind::kConfigError: return "ConfigError";
    case ErrorKind::kVariantMismatch: return "VariantMismatch";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kEmptyVideo: return "EmptyVideo";
    case ErrorKind::kNonFiniteCost: return "NonFiniteCost";
    case ErrorKind::kInsufficientPixels: return "InsufficientPixels";
    case ErrorKind::kMissingPredecessor: return "MissingPredecessor";
    case ErrorKind::kStageOrderViolation: return "StageOrderViolation";
    case ErrorKind::kUnknownCategory: return "UnknownCategory";
    case ErrorKind::kMissingFrame: return "MissingFrame";
    case ErrorKind::kIo: return "IoError";
  }
  return "Error";
}

bool Error::is_validation() const {
  switch (kind_) {
    case ErrorKind::kInvalidSpec:
    case ErrorKind::kConfigError:
    case ErrorKind::kMissingPredecessor:
    case ErrorKind::kStageOrderViolation:
    case ErrorKind::kVariantMismatch:
    case ErrorKind::kUnknownCategory:
      return true;
    default:
      return false;
  }
}

}  // namespace depthvis
