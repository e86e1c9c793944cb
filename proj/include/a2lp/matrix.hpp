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

#ifndef A2LP_MATRIX_HPP_
#define A2LP_MATRIX_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace a2lp {

using Index = std::size_t;

// Dense row-major matrix of doubles. Rows are contiguous so that row spans
// can be handed straight to the vector kernels.
class Matrix {
 public:
  Matrix() = default;
  Matrix(Index rows, Index cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  // Builds from nested braces; every inner list must have the same length.
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(Index n);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(Index r, Index c) { return data_[r * cols_ + c]; }
  double operator()(Index r, Index c) const { return data_[r * cols_ + c]; }

  std::span<double> row(Index r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(Index r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  Matrix transposed() const;

  // Copy of rows [first, first + count).
  Matrix row_block(Index first, Index count) const;

  bool operator==(const Matrix&) const = default;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> data_;
};

// max_ij |a_ij - b_ij|; shapes must agree.
double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace a2lp

#endif  // A2LP_MATRIX_HPP_
