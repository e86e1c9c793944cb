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

#include "a2lp/episode.hpp"

#include <numeric>
#include <string>

#include "a2lp/error.hpp"

namespace a2lp {

std::vector<Index> Episode::row_order() const {
  std::vector<Index> order(support_indices);
  order.insert(order.end(), query_indices.begin(), query_indices.end());
  return order;
}

Episode Episode::localized() const {
  Episode local = *this;
  std::iota(local.support_indices.begin(), local.support_indices.end(), Index{0});
  std::iota(local.query_indices.begin(), local.query_indices.end(), support_count());
  return local;
}

void validate(const Episode& episode, Index set_size) {
  if (episode.n_way == 0) throw Error(ErrorCode::kInvalidArgument, "episode has no classes");
  if (episode.support_labels.size() != episode.support_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "support label count differs from supports");
  }
  if (episode.has_query_labels() && episode.query_labels.size() != episode.query_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "query label count differs from queries");
  }
  std::vector<bool> used(set_size, false);
  for (const Index i : episode.row_order()) {
    if (i >= set_size) {
      throw Error(ErrorCode::kInvalidArgument, "episode index " + std::to_string(i) +
                                                   " out of range (set has " +
                                                   std::to_string(set_size) + " rows)");
    }
    if (used[i]) {
      throw Error(ErrorCode::kInvalidArgument,
                  "episode index " + std::to_string(i) + " appears twice");
    }
    used[i] = true;
  }
  std::vector<bool> seen(episode.n_way, false);
  for (const Index label : episode.support_labels) {
    if (label >= episode.n_way) {
      throw Error(ErrorCode::kInvalidArgument, "support label outside 0..N-1");
    }
    seen[label] = true;
  }
  for (const Index label : episode.query_labels) {
    if (label >= episode.n_way) {
      throw Error(ErrorCode::kInvalidArgument, "query label outside 0..N-1");
    }
  }
  for (Index c = 0; c < episode.n_way; ++c) {
    if (!seen[c]) {
      throw Error(ErrorCode::kMissingClass,
                  "class " + std::to_string(c) + " has no support example");
    }
  }
}

}  // namespace a2lp
