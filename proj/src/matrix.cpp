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

#include "a2lp/matrix.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "a2lp/error.hpp"

namespace a2lp {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const Index r = rows.size();
  const Index c = r == 0 ? 0 : rows.begin()->size();
  Matrix m(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) {
      throw Error(ErrorCode::kDimensionMismatch, "ragged rows in Matrix::from_rows");
    }
    std::copy(row.begin(), row.end(), m.row(i++).begin());
  }
  return m;
}

Matrix Matrix::identity(Index n) {
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (Index r = 0; r < rows_; ++r)
    for (Index c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix Matrix::row_block(Index first, Index count) const {
  assert(first + count <= rows_);
  Matrix block(count, cols_);
  std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(first * cols_), count * cols_,
              block.data_.begin());
  return block;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "max_abs_diff: shape mismatch");
  }
  double worst = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (Index i = 0; i < av.size(); ++i) worst = std::max(worst, std::abs(av[i] - bv[i]));
  return worst;
}

}  // namespace a2lp
