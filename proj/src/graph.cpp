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

#include "a2lp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <ostream>
#include <string>

#include "a2lp/error.hpp"
#include "a2lp/kernels.hpp"

namespace a2lp {
namespace {

constexpr double kMinNorm = 1e-12;
constexpr double kMinDegree = 1e-12;

std::vector<double> row_norms(const Matrix& vectors) {
  std::vector<double> norms(vectors.rows());
  for (Index i = 0; i < vectors.rows(); ++i) {
    norms[i] = std::sqrt(kernels::squared_norm(vectors.row(i)));
    if (norms[i] <= kMinNorm) {
      throw Error(ErrorCode::kZeroVector, "zero-norm vector at row " + std::to_string(i));
    }
  }
  return norms;
}

}  // namespace

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "cosine_similarity: length mismatch");
  }
  const double nu = std::sqrt(kernels::squared_norm(u));
  const double nv = std::sqrt(kernels::squared_norm(v));
  if (nu <= kMinNorm || nv <= kMinNorm) {
    throw Error(ErrorCode::kZeroVector, "cosine_similarity: zero-norm input");
  }
  return kernels::dot(u, v) / (nu * nv);
}

Matrix cosine_matrix(const Matrix& vectors) {
  const Index n = vectors.rows();
  const auto norms = row_norms(vectors);
  Matrix sim(n, n);
  for (Index i = 0; i < n; ++i) {
    sim(i, i) = kernels::squared_norm(vectors.row(i)) / (norms[i] * norms[i]);
    for (Index j = i + 1; j < n; ++j) {
      const double c = kernels::dot(vectors.row(i), vectors.row(j)) / (norms[i] * norms[j]);
      sim(i, j) = c;
      sim(j, i) = c;
    }
  }
  return sim;
}

KnnMask select_neighbours(const Matrix& similarity, Index k) {
  const Index n = similarity.rows();
  if (similarity.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "similarity matrix must be square");
  }
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be positive");
  if (n < 2 || k >= n) {
    throw Error(ErrorCode::kInvalidArgument,
                "k exceeds candidate count (k=" + std::to_string(k) +
                    ", T=" + std::to_string(n) + ")");
  }

  std::vector<Triplet> entries;
  entries.reserve(n * k);
  std::vector<Index> candidates(n - 1);
  for (Index j = 0; j < n; ++j) {
    Index slot = 0;
    for (Index i = 0; i < n; ++i)
      if (i != j) candidates[slot++] = i;
    const auto closer = [&](Index a, Index b) {
      const double sa = similarity(a, j);
      const double sb = similarity(b, j);
      return sa != sb ? sa > sb : a < b;
    };
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                      candidates.end(), closer);
    for (Index r = 0; r < k; ++r) entries.push_back({candidates[r], j, 0.0});
  }
  return SparseMatrix::from_triplets(n, n, std::move(entries)).pattern();
}

SparseMatrix affinity_from_mask(const Matrix& similarity, const KnnMask& mask, double gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "gamma must be positive");
  std::vector<Triplet> entries;
  entries.reserve(mask.nnz());
  for (Index i = 0; i < mask.rows; ++i) {
    for (const Index j : mask.row(i)) {
      const double c = std::max(similarity(i, j), 0.0);
      entries.push_back({i, j, std::pow(c, gamma)});
    }
  }
  return SparseMatrix::from_triplets(mask.rows, mask.cols, std::move(entries));
}

SparseMatrix build_affinity(const Matrix& vectors, const GraphConfig& config) {
  if (vectors.rows() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "graph needs at least two vectors");
  }
  if (config.k >= vectors.rows()) {
    throw Error(ErrorCode::kInvalidArgument,
                "k exceeds candidate count (k=" + std::to_string(config.k) +
                    ", T=" + std::to_string(vectors.rows()) + ")");
  }
  const Matrix sim = cosine_matrix(vectors);
  return affinity_from_mask(sim, select_neighbours(sim, config.k), config.gamma);
}

PropagationGraph normalize_graph(const SparseMatrix& affinity) {
  const Index n = affinity.rows();
  if (affinity.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "affinity matrix must be square");
  }
  for (Index i = 0; i < n; ++i) {
    const auto idx = affinity.row_indices(i);
    const auto val = affinity.row_values(i);
    for (Index e = 0; e < idx.size(); ++e) {
      if (idx[e] == i && val[e] != 0.0) {
        throw Error(ErrorCode::kInvalidArgument, "affinity has a nonzero diagonal");
      }
      if (!(val[e] >= 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "affinity has a negative entry");
      }
    }
  }

  // W on the union of the patterns of A and A^T. Each value is formed from
  // the same two operands in both (i, j) and (j, i), so W is exactly symmetric.
  const SparseMatrix transposed = affinity.transposed();
  std::vector<Triplet> w_entries;
  w_entries.reserve(2 * affinity.nnz());
  std::vector<Index> merged;
  for (Index i = 0; i < n; ++i) {
    const auto a = affinity.row_indices(i);
    const auto t = transposed.row_indices(i);
    merged.clear();
    std::set_union(a.begin(), a.end(), t.begin(), t.end(), std::back_inserter(merged));
    for (const Index j : merged) {
      w_entries.push_back({i, j, (affinity.at(i, j) + affinity.at(j, i)) * 0.5});
    }
  }
  PropagationGraph graph;
  graph.adjacency = SparseMatrix::from_triplets(n, n, std::move(w_entries));
  graph.knn_mask = affinity.pattern();

  graph.degree.assign(n, 0.0);
  for (Index i = 0; i < n; ++i) {
    for (const double w : graph.adjacency.row_values(i)) graph.degree[i] += w;
    if (graph.degree[i] <= kMinDegree) {
      throw Error(ErrorCode::kIsolatedVertex, "isolated vertex " + std::to_string(i));
    }
  }

  std::vector<Triplet> n_entries;
  n_entries.reserve(graph.adjacency.nnz());
  for (Index i = 0; i < n; ++i) {
    const auto idx = graph.adjacency.row_indices(i);
    const auto val = graph.adjacency.row_values(i);
    for (Index e = 0; e < idx.size(); ++e) {
      const Index j = idx[e];
      n_entries.push_back({i, j, val[e] / std::sqrt(graph.degree[i] * graph.degree[j])});
    }
  }
  graph.normalized_adjacency = SparseMatrix::from_triplets(n, n, std::move(n_entries));
  return graph;
}

void write_coordinates(const SparseMatrix& m, std::ostream& out) {
  char buf[64];
  for (Index i = 0; i < m.rows(); ++i) {
    const auto idx = m.row_indices(i);
    const auto val = m.row_values(i);
    for (Index e = 0; e < idx.size(); ++e) {
      std::snprintf(buf, sizeof(buf), "%zu %zu %.17g\n", i, idx[e], val[e]);
      out << buf;
    }
  }
}

}  // namespace a2lp
