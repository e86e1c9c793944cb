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

#ifndef A2LP_SPARSE_HPP_
#define A2LP_SPARSE_HPP_

#include <span>
#include <vector>

#include "a2lp/matrix.hpp"

namespace a2lp {

// Compressed-row sparsity structure. Column indices are sorted within a row.
struct SparsePattern {
  Index rows = 0;
  Index cols = 0;
  std::vector<Index> row_ptr;
  std::vector<Index> col_idx;

  Index nnz() const noexcept { return col_idx.size(); }
  std::span<const Index> row(Index r) const {
    return {col_idx.data() + row_ptr[r], row_ptr[r + 1] - row_ptr[r]};
  }
  bool contains(Index r, Index c) const;

  bool operator==(const SparsePattern&) const = default;
};

struct Triplet {
  Index row;
  Index col;
  double value;
};

// CSR matrix. Explicit zeros are kept: the pattern is part of the value.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  // Duplicate (row, col) entries are rejected.
  static SparseMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> entries);

  Index rows() const noexcept { return pattern_.rows; }
  Index cols() const noexcept { return pattern_.cols; }
  Index nnz() const noexcept { return pattern_.nnz(); }
  const SparsePattern& pattern() const noexcept { return pattern_; }

  std::span<const Index> row_indices(Index r) const { return pattern_.row(r); }
  std::span<const double> row_values(Index r) const {
    return {values_.data() + pattern_.row_ptr[r],
            pattern_.row_ptr[r + 1] - pattern_.row_ptr[r]};
  }
  std::span<const double> values() const noexcept { return values_; }

  // Zero when (r, c) is not stored.
  double at(Index r, Index c) const;

  SparseMatrix transposed() const;
  Matrix to_dense() const;

  // this * x; requires cols() == x.rows().
  Matrix multiply(const Matrix& x) const;

  bool operator==(const SparseMatrix&) const = default;

 private:
  SparsePattern pattern_;
  std::vector<double> values_;
};

}  // namespace a2lp

#endif  // A2LP_SPARSE_HPP_
