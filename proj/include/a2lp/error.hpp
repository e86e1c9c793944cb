// Copyright 2026 The a2lp Authors
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

#ifndef A2LP_ERROR_HPP_
#define A2LP_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace a2lp {

enum class ErrorCode {
  kIo,
  kMalformedHeader,
  kParse,
  kDimensionMismatch,
  kNonFinite,
  kEmptySet,
  kZeroVector,
  kNegativeFeature,
  kInvalidArgument,
  kIsolatedVertex,
  kMissingClass,
  kInsufficientData,
  kNotConverged,
  kInternal,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above so
// callers (and tests) can tell variants apart without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace a2lp

#endif  // A2LP_ERROR_HPP_
