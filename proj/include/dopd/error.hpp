// Copyright 2026 The dopd Authors
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

#ifndef DOPD_ERROR_HPP_
#define DOPD_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace dopd {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kNonConvergence,
  kInfeasible,
  kEmptyColumn,
  kMinWeightInfeasible,
  kGenerationFailed,
  kWeightUnderflow,
  kNotDoublyStochastic,
  kLengthMismatch,
  kNonPositiveValues,
  kConfigParse,
  kMissingColumn,
  kEmptyInput,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// CLI can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kEmptyColumn: return "EmptyColumn";
    case ErrorCode::kMinWeightInfeasible: return "MinWeightInfeasible";
    case ErrorCode::kGenerationFailed: return "GenerationFailed";
    case ErrorCode::kWeightUnderflow: return "WeightUnderflow";
    case ErrorCode::kNotDoublyStochastic: return "NotDoublyStochastic";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kNonPositiveValues: return "NonPositiveValues";
    case ErrorCode::kConfigParse: return "ConfigParse";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

inline void Require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace dopd

#endif  // DOPD_ERROR_HPP_
