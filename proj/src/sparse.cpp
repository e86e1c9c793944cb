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

#include "a2lp/sparse.hpp"

#include <algorithm>
#include <string>

#include "a2lp/error.hpp"

namespace a2lp {

bool SparsePattern::contains(Index r, Index c) const {
  const auto cols_in_row = row(r);
  return std::binary_search(cols_in_row.begin(), cols_in_row.end(), c);
}

SparseMatrix SparseMatrix::from_triplets(Index rows, Index cols, std::vector<Triplet> entries) {
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m;
  m.pattern_.rows = rows;
  m.pattern_.cols = cols;
  m.pattern_.row_ptr.assign(rows + 1, 0);
  m.pattern_.col_idx.reserve(entries.size());
  m.values_.reserve(entries.size());
  for (Index e = 0; e < entries.size(); ++e) {
    const Triplet& t = entries[e];
    if (t.row >= rows || t.col >= cols) {
      throw Error(ErrorCode::kDimensionMismatch, "sparse entry out of range");
    }
    if (e > 0 && entries[e - 1].row == t.row && entries[e - 1].col == t.col) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate sparse entry (" + std::to_string(t.row) + ", " +
                      std::to_string(t.col) + ")");
    }
    ++m.pattern_.row_ptr[t.row + 1];
    m.pattern_.col_idx.push_back(t.col);
    m.values_.push_back(t.value);
  }
  for (Index r = 0; r < rows; ++r) m.pattern_.row_ptr[r + 1] += m.pattern_.row_ptr[r];
  return m;
}

double SparseMatrix::at(Index r, Index c) const {
  const auto cols_in_row = row_indices(r);
  const auto it = std::lower_bound(cols_in_row.begin(), cols_in_row.end(), c);
  if (it == cols_in_row.end() || *it != c) return 0.0;
  return row_values(r)[static_cast<Index>(it - cols_in_row.begin())];
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<Triplet> entries;
  entries.reserve(nnz());
  for (Index r = 0; r < rows(); ++r) {
    const auto idx = row_indices(r);
    const auto val = row_values(r);
    for (Index e = 0; e < idx.size(); ++e) entries.push_back({idx[e], r, val[e]});
  }
  return from_triplets(cols(), rows(), std::move(entries));
}

Matrix SparseMatrix::to_dense() const {
  Matrix dense(rows(), cols());
  for (Index r = 0; r < rows(); ++r) {
    const auto idx = row_indices(r);
    const auto val = row_values(r);
    for (Index e = 0; e < idx.size(); ++e) dense(r, idx[e]) = val[e];
  }
  return dense;
}

Matrix SparseMatrix::multiply(const Matrix& x) const {
  if (x.rows() != cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "sparse multiply: shape mismatch");
  }
  Matrix y(rows(), x.cols());
  for (Index r = 0; r < rows(); ++r) {
    const auto idx = row_indices(r);
    const auto val = row_values(r);
    auto out = y.row(r);
    for (Index e = 0; e < idx.size(); ++e) {
      const auto in = x.row(idx[e]);
      for (Index c = 0; c < in.size(); ++c) out[c] += val[e] * in[c];
    }
  }
  return y;
}

}  // namespace a2lp
