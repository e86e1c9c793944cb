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

#include "a2lp/error.hpp"

namespace a2lp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "io";
    case ErrorCode::kMalformedHeader: return "malformed_header";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kEmptySet: return "empty_set";
    case ErrorCode::kZeroVector: return "zero_vector";
    case ErrorCode::kNegativeFeature: return "negative_feature";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kIsolatedVertex: return "isolated_vertex";
    case ErrorCode::kMissingClass: return "missing_class";
    case ErrorCode::kInsufficientData: return "insufficient_data";
    case ErrorCode::kNotConverged: return "not_converged";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

}  // namespace a2lp
