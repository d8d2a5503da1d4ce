// Copyright 2026 The pairerr Authors.
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

namespace pairerr {

enum class ErrorCode {
  kInvalidInput,
  kMissingPair,
  kDuplicatePair,
  kIncompleteMatrix,
  kMissingTrials,
  kInconsistentCounts,
  kInsufficientTrials,
  kLengthMismatch,
  kInvalidRate,
  kRankOutOfRange,
  kSupportMismatch,
  kDegenerateStrengths,
  kNonPositiveInit,
  kEmptyText,
  kMissingLexicon,
  kAuthError,
  kRateLimited,
  kParseFailure,
  kNetworkError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kMissingPair: return "MissingPair";
    case ErrorCode::kDuplicatePair: return "DuplicatePair";
    case ErrorCode::kIncompleteMatrix: return "IncompleteMatrix";
    case ErrorCode::kMissingTrials: return "MissingTrials";
    case ErrorCode::kInconsistentCounts: return "InconsistentCounts";
    case ErrorCode::kInsufficientTrials: return "InsufficientTrials";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kInvalidRate: return "InvalidRate";
    case ErrorCode::kRankOutOfRange: return "RankOutOfRange";
    case ErrorCode::kSupportMismatch: return "SupportMismatch";
    case ErrorCode::kDegenerateStrengths: return "DegenerateStrengths";
    case ErrorCode::kNonPositiveInit: return "NonPositiveInit";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kMissingLexicon: return "MissingLexicon";
    case ErrorCode::kAuthError: return "AuthError";
    case ErrorCode::kRateLimited: return "RateLimited";
    case ErrorCode::kParseFailure: return "ParseFailure";
    case ErrorCode::kNetworkError: return "NetworkError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI's exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pairerr
