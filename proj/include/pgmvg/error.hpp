// Copyright 2026 The pgmvg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PGMVG_ERROR_HPP
#define PGMVG_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace pgmvg {

enum class ErrorCode {
  // configuration
  kConfigError,
  kSpecError,
  // malformed or inconsistent input data
  kZeroVectorRow,
  kBadMagic,
  kTruncatedFile,
  kNonFiniteValue,
  kCountMismatch,
  kDuplicateId,
  kEmptyId,
  kShapeMismatch,
  kIoError,
  // failures while running an algorithm
  kDegenerateCenter,
  kTooFewActive,
  kDepthExceeded,
  kTooFewUtterances,
  kTooFewScores,
  kEmptyAfterFilter,
  kNoLabeledPairs,
  kDegenerateLabels,
};

inline constexpr std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kSpecError: return "SpecError";
    case ErrorCode::kZeroVectorRow: return "ZeroVectorRow";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kCountMismatch: return "CountMismatch";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kEmptyId: return "EmptyId";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kDegenerateCenter: return "DegenerateCenter";
    case ErrorCode::kTooFewActive: return "TooFewActive";
    case ErrorCode::kDepthExceeded: return "DepthExceeded";
    case ErrorCode::kTooFewUtterances: return "TooFewUtterances";
    case ErrorCode::kTooFewScores: return "TooFewScores";
    case ErrorCode::kEmptyAfterFilter: return "EmptyAfterFilter";
    case ErrorCode::kNoLabeledPairs: return "NoLabeledPairs";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
  }
  return "Unknown";
}

/// Coarse grouping used by the command-line tool to pick an exit code.
enum class ErrorKind { kUsage, kData, kRuntime };

inline constexpr ErrorKind error_kind(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfigError:
    case ErrorCode::kSpecError:
      return ErrorKind::kUsage;
    case ErrorCode::kZeroVectorRow:
    case ErrorCode::kBadMagic:
    case ErrorCode::kTruncatedFile:
    case ErrorCode::kNonFiniteValue:
    case ErrorCode::kCountMismatch:
    case ErrorCode::kDuplicateId:
    case ErrorCode::kEmptyId:
    case ErrorCode::kShapeMismatch:
    case ErrorCode::kIoError:
      return ErrorKind::kData;
    default:
      return ErrorKind::kRuntime;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorKind kind() const noexcept { return error_kind(code_); }

 private:
  ErrorCode code_;
};

}  // namespace pgmvg

#endif  // PGMVG_ERROR_HPP
