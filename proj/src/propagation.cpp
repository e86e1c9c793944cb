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

#include "a2lp/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "a2lp/error.hpp"
#include "a2lp/kernels.hpp"

namespace a2lp {
namespace {

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in [0, 1)");
  }
}

void check_shapes(const PropagationGraph& graph, const LabelMatrix& labels) {
  if (graph.size() != labels.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "graph has " + std::to_string(graph.size()) + " vertices, label matrix has " +
                    std::to_string(labels.size()) + " rows");
  }
}

}  // namespace

LabelMatrix build_label_matrix(std::span<const Index> support_labels, Index n_way, Index total) {
  if (support_labels.size() > total) {
    throw Error(ErrorCode::kDimensionMismatch, "more supports than rows");
  }
  LabelMatrix y{Matrix(total, n_way), support_labels.size()};
  std::vector<bool> seen(n_way, false);
  for (Index i = 0; i < support_labels.size(); ++i) {
    if (support_labels[i] >= n_way) {
      throw Error(ErrorCode::kInvalidArgument, "support label outside 0..N-1");
    }
    y.values(i, support_labels[i]) = 1.0;
    seen[support_labels[i]] = true;
  }
  for (Index c = 0; c < n_way; ++c) {
    if (!seen[c]) {
      throw Error(ErrorCode::kMissingClass,
                  "class " + std::to_string(c) + " absent from the support set");
    }
  }
  return y;
}

LabelMatrix build_label_matrix(const Episode& episode) {
  return build_label_matrix(episode.support_labels, episode.n_way, episode.size());
}

PropagationSystem::PropagationSystem(const PropagationGraph& graph, double alpha)
    : alpha_(alpha) {
  check_alpha(alpha);
  const Index n = graph.size();
  Matrix m = Matrix::identity(n);
  for (Index i = 0; i < n; ++i) {
    const auto idx = graph.normalized_adjacency.row_indices(i);
    const auto val = graph.normalized_adjacency.row_values(i);
    for (Index e = 0; e < idx.size(); ++e) m(i, idx[e]) -= alpha * val[e];
  }

  lower_ = Matrix(n, n);
  for (Index i = 0; i < n; ++i) {
    auto li = lower_.row(i);
    for (Index j = 0; j <= i; ++j) {
      const auto lj = lower_.row(j);
      const double s = m(i, j) - kernels::dot(li.first(j), lj.first(j));
      if (i == j) {
        if (!(s > 0.0)) {
          throw Error(ErrorCode::kInternal,
                      "propagation system is not positive definite at pivot " +
                          std::to_string(i));
        }
        li[i] = std::sqrt(s);
      } else {
        li[j] = s / lj[j];
      }
    }
  }
  upper_ = lower_.transposed();
}

Matrix PropagationSystem::solve(const Matrix& rhs) const {
  const Index n = size();
  if (rhs.rows() != n) throw Error(ErrorCode::kDimensionMismatch, "rhs row count mismatch");
  // Columns of the right-hand side become contiguous rows.
  Matrix x = rhs.transposed();
  for (Index c = 0; c < x.rows(); ++c) {
    auto b = x.row(c);
    for (Index i = 0; i < n; ++i) {
      b[i] = (b[i] - kernels::dot(lower_.row(i).first(i), b.first(i))) / lower_(i, i);
    }
    for (Index i = n; i-- > 0;) {
      const Index tail = n - i - 1;
      b[i] = (b[i] - kernels::dot(upper_.row(i).last(tail), b.last(tail))) / upper_(i, i);
    }
  }
  return x.transposed();
}

SimilarityMatrix propagate(const PropagationGraph& graph, const LabelMatrix& labels,
                           double alpha) {
  check_shapes(graph, labels);
  const PropagationSystem system(graph, alpha);
  return {system.solve(labels.values), alpha};
}

IterativePropagation propagate_iterative(const PropagationGraph& graph,
                                         const LabelMatrix& labels, double alpha,
                                         Index max_iterations, double tolerance) {
  check_alpha(alpha);
  check_shapes(graph, labels);
  Matrix z = labels.values;
  double change = 0.0;
  for (Index it = 1; it <= max_iterations; ++it) {
    Matrix next = graph.normalized_adjacency.multiply(z);
    auto nv = next.values();
    const auto yv = labels.values.values();
    for (Index e = 0; e < nv.size(); ++e) nv[e] = alpha * nv[e] + yv[e];
    change = max_abs_diff(next, z);
    z = std::move(next);
    if (change < tolerance) return {{std::move(z), alpha}, it};
  }
  throw Error(ErrorCode::kNotConverged,
              "label propagation did not converge in " + std::to_string(max_iterations) +
                  " iterations (last change " + std::to_string(change) + ")");
}

double propagation_residual(const PropagationGraph& graph, const Matrix& z, const Matrix& y,
                            double alpha) {
  Matrix r = graph.normalized_adjacency.multiply(z);
  auto rv = r.values();
  const auto zv = z.values();
  const auto yv = y.values();
  double worst = 0.0;
  for (Index e = 0; e < rv.size(); ++e) {
    worst = std::max(worst, std::abs(zv[e] - alpha * rv[e] - yv[e]));
  }
  return worst;
}

std::vector<Index> predict(const SimilarityMatrix& z, Index support_count) {
  const Matrix& v = z.values;
  std::vector<Index> labels;
  labels.reserve(v.rows() - std::min(support_count, v.rows()));
  for (Index i = support_count; i < v.rows(); ++i) {
    const auto row = v.row(i);
    labels.push_back(static_cast<Index>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
  return labels;
}

}  // namespace a2lp
