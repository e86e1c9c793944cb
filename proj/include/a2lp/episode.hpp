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

#ifndef A2LP_EPISODE_HPP_
#define A2LP_EPISODE_HPP_

#include <vector>

#include "a2lp/matrix.hpp"

namespace a2lp {

// One N-way task over an EmbeddingSet. Labels are remapped to 0..N-1.
// Propagation uses the row order "support rows first, then query rows".
// Sampled episodes are balanced (K support and M query per class); episodes
// assembled by hand may leave k_shot / m_query at 0.
struct Episode {
  std::vector<Index> support_indices;
  std::vector<Index> support_labels;
  std::vector<Index> query_indices;
  std::vector<Index> query_labels;  // empty when unknown
  Index n_way = 0;
  Index k_shot = 0;
  Index m_query = 0;

  Index support_count() const noexcept { return support_indices.size(); }
  Index query_count() const noexcept { return query_indices.size(); }
  Index size() const noexcept { return support_count() + query_count(); }
  bool has_query_labels() const noexcept { return !query_labels.empty(); }

  // Support indices followed by query indices.
  std::vector<Index> row_order() const;

  // Same episode over rows 0..size()-1 of the gathered row_order() set.
  Episode localized() const;
};

// Structural checks: index ranges and disjointness, label ranges, every
// class present among the supports. Throws a2lp::Error.
void validate(const Episode& episode, Index set_size);

}  // namespace a2lp

#endif  // A2LP_EPISODE_HPP_
