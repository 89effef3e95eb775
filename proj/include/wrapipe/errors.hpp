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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wrapipe {

enum class ErrorCode {
  kInvalidArgument,
  kSchema,
  kCyclicGraph,
  kUnroutableBranch,
  kInsufficientSamples,
  kNoFeasibleMicrobatch,
  kOutOfProfileRange,
  kLayerTooLarge,
  kUnpackable,
  kInvalidConfiguration,
  kMissingProfile,
  kNoFeasibleConfiguration,
  kNonUniformModel,
  kEmptyInput,
  kCapacityViolation,
  kNonIntegralT,
  kTooLarge,
  kDeadlockDetected,
  kInternal,
};

std::string_view error_code_name(ErrorCode code);

// Process exit status for the CLI: 2 validation, 3 infeasible, 4 internal.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool cond, ErrorCode code, const std::string& message) {
  if (!cond) fail(code, message);
}

}  // namespace wrapipe
