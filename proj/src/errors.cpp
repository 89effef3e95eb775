// Copyright 2026 The wrapipe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wrapipe/errors.hpp"

namespace wrapipe {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kSchema: return "SchemaViolation";
    case ErrorCode::kCyclicGraph: return "CyclicGraph";
    case ErrorCode::kUnroutableBranch: return "UnroutableBranch";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kNoFeasibleMicrobatch: return "NoFeasibleMicrobatch";
    case ErrorCode::kOutOfProfileRange: return "OutOfProfileRange";
    case ErrorCode::kLayerTooLarge: return "LayerTooLarge";
    case ErrorCode::kUnpackable: return "Unpackable";
    case ErrorCode::kInvalidConfiguration: return "InvalidConfiguration";
    case ErrorCode::kMissingProfile: return "MissingProfile";
    case ErrorCode::kNoFeasibleConfiguration: return "NoFeasibleConfiguration";
    case ErrorCode::kNonUniformModel: return "NonUniformModel";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kCapacityViolation: return "CapacityViolation";
    case ErrorCode::kNonIntegralT: return "NonIntegralT";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kDeadlockDetected: return "DeadlockDetected";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kLayerTooLarge:
    case ErrorCode::kUnpackable:
    case ErrorCode::kNoFeasibleMicrobatch:
    case ErrorCode::kNoFeasibleConfiguration:
    case ErrorCode::kCapacityViolation:
      return 3;
    case ErrorCode::kDeadlockDetected:
    case ErrorCode::kInternal:
      return 4;
    default:
      return 2;
  }
}

}  // namespace wrapipe
