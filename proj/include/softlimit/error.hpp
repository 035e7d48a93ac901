// Copyright 2026 The softlimit Authors
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

namespace softlimit {

/// Failure categories shared by every module. The numeric values are part of
/// the C API (see softlimit.h) and must not be reordered.
enum class ErrorCode : int {
  kNotSquare = 1,
  kNotHermitian = 2,
  kShapeMismatch = 3,
  kNotInSpan = 4,
  kInconsistentAction = 5,
  kDimensionMismatch = 6,
  kFlagViolation = 7,
  kHorizonTooShort = 8,
  kNotStrict = 9,
  kNotSelfAdjoint = 10,
  kSolverFailure = 11,
  kNumericalFailure = 12,
  kParseError = 13,
  kConfigInvalid = 14,
  kBadGrid = 15,
  kInvalidArgument = 16,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace softlimit
