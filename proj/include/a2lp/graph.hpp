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

#ifndef A2LP_GRAPH_HPP_
#define A2LP_GRAPH_HPP_

#include <iosfwd>
#include <span>
#include <vector>

#include "a2lp/matrix.hpp"
#include "a2lp/sparse.hpp"

namespace a2lp {

struct GraphConfig {
  Index k = 20;        // neighbours per vertex, self excluded
  double gamma = 3.0;  // exponent on the clamped cosine
};

// Directed neighbour selection. Entry (i, j) present iff v_i is one of the k
// nearest neighbours of v_j. Each column holds exactly k entries.
using KnnMask = SparsePattern;

struct PropagationGraph {
  SparseMatrix normalized_adjacency;  // D^-1/2 W D^-1/2, exactly symmetric
  SparseMatrix adjacency;             // W = (A + A^T) / 2
  KnnMask knn_mask;                   // support of A
  std::vector<double> degree;         // row sums of W, all > 0

  Index size() const noexcept { return degree.size(); }
};

// u.v / (|u| |v|). Inputs need not be unit length; zero-norm input throws.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

// Dense T x T cosine similarities. Exactly symmetric.
Matrix cosine_matrix(const Matrix& vectors);

// For each column j, the k rows i != j with the largest similarity(i, j).
// Ties go to the lower row index.
KnnMask select_neighbours(const Matrix& similarity, Index k);

// A(i, j) = max(similarity(i, j), 0)^gamma on the mask. Clamped entries are
// stored as explicit zeros so the pattern equals the mask.
SparseMatrix affinity_from_mask(const Matrix& similarity, const KnnMask& mask, double gamma);

// Sparse kNN affinity of `vectors` (rows are points). Requires
// 1 <= k <= T - 1 and gamma > 0.
SparseMatrix build_affinity(const Matrix& vectors, const GraphConfig& config);

// Symmetrizes and normalizes A. Throws on an isolated vertex.
PropagationGraph normalize_graph(const SparseMatrix& affinity);

inline PropagationGraph build_graph(const Matrix& vectors, const GraphConfig& config) {
  return normalize_graph(build_affinity(vectors, config));
}

// "i j value" lines, one per stored entry, row-major.
void write_coordinates(const SparseMatrix& m, std::ostream& out);

}  // namespace a2lp

#endif  // A2LP_GRAPH_HPP_
