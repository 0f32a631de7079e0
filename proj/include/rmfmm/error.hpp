// Copyright 2026 The rmfmm Authors. All Rights Reserved.
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

#ifndef RMFMM_ERROR_HPP_
#define RMFMM_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace rmfmm {

enum class ErrorKind {
  kDimensionMismatch,
  kInfeasibleInit,
  kInfeasibleFactors,
  kInfeasibleDirection,
  kNonFiniteObjective,
  kNonFinite,
  kEmptyMask,
  kEmptyTrace,
  kNegativeGamma,
  kRankTooLarge,
  kInvalidArgument,
  kInvalidFraction,
  kParseError,
  kShapeHeaderMismatch,
  kNonFiniteValue,
  kIoError,
};

inline std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kInfeasibleInit: return "InfeasibleInit";
    case ErrorKind::kInfeasibleFactors: return "InfeasibleFactors";
    case ErrorKind::kInfeasibleDirection: return "InfeasibleDirection";
    case ErrorKind::kNonFiniteObjective: return "NonFiniteObjective";
    case ErrorKind::kNonFinite: return "NonFinite";
    case ErrorKind::kEmptyMask: return "EmptyMask";
    case ErrorKind::kEmptyTrace: return "EmptyTrace";
    case ErrorKind::kNegativeGamma: return "NegativeGamma";
    case ErrorKind::kRankTooLarge: return "RankTooLarge";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kInvalidFraction: return "InvalidFraction";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kShapeHeaderMismatch: return "ShapeHeaderMismatch";
    case ErrorKind::kNonFiniteValue: return "NonFiniteValue";
    case ErrorKind::kIoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it onto a stable exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace rmfmm

#endif  // RMFMM_ERROR_HPP_
