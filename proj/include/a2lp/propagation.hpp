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

#ifndef A2LP_PROPAGATION_HPP_
#define A2LP_PROPAGATION_HPP_

#include <span>
#include <vector>

#include "a2lp/episode.hpp"
#include "a2lp/graph.hpp"
#include "a2lp/matrix.hpp"

namespace a2lp {

// T x N. Rows [0, support_count) are one-hot, the remaining rows are zero.
struct LabelMatrix {
  Matrix values;
  Index support_count = 0;

  Index size() const noexcept { return values.rows(); }
  Index classes() const noexcept { return values.cols(); }
};

LabelMatrix build_label_matrix(const Episode& episode);

// Supports occupy rows 0..labels.size()-1 of a system with `total` rows.
LabelMatrix build_label_matrix(std::span<const Index> support_labels, Index n_way, Index total);

// Z, the manifold class-similarity matrix.
struct SimilarityMatrix {
  Matrix values;
  double alpha = 0.0;
};

// Cholesky factorization of I - alpha * W_norm. The matrix is symmetric
// positive definite for 0 <= alpha < 1, so the same factor serves both the
// forward solve and the adjoint solve of the gradient pass.
class PropagationSystem {
 public:
  PropagationSystem(const PropagationGraph& graph, double alpha);

  Index size() const noexcept { return lower_.rows(); }
  double alpha() const noexcept { return alpha_; }

  // Solves (I - alpha W_norm) X = rhs, column by column.
  Matrix solve(const Matrix& rhs) const;

 private:
  Matrix lower_;
  Matrix upper_;  // lower_ transposed, kept for contiguous back substitution
  double alpha_;
};

SimilarityMatrix propagate(const PropagationGraph& graph, const LabelMatrix& labels,
                           double alpha);

struct IterativePropagation {
  SimilarityMatrix z;
  Index iterations = 0;
};

// Fixed-point iteration Z <- alpha W_norm Z + Y from Z = Y, until the
// max-norm change drops below `tolerance`. Throws kNotConverged otherwise.
IterativePropagation propagate_iterative(const PropagationGraph& graph,
                                         const LabelMatrix& labels, double alpha,
                                         Index max_iterations, double tolerance);

// ||(I - alpha W_norm) Z - Y||_max
double propagation_residual(const PropagationGraph& graph, const Matrix& z, const Matrix& y,
                            double alpha);

// Row-wise argmax over the query rows (index >= support_count); ties go to
// the lowest class.
std::vector<Index> predict(const SimilarityMatrix& z, Index support_count);

}  // namespace a2lp

#endif  // A2LP_PROPAGATION_HPP_
