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

#include "a2lp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "a2lp/error.hpp"
#include "a2lp/graph.hpp"
#include "a2lp/kernels.hpp"
#include "a2lp/propagation.hpp"

namespace a2lp {
namespace {

std::vector<double> unit(std::span<const double> v) {
  const double norm = std::sqrt(kernels::squared_norm(v));
  if (norm <= 1e-12) throw Error(ErrorCode::kZeroVector, "cannot normalize a zero vector");
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x /= norm;
  return out;
}

Matrix normalized_rows(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (Index r = 0; r < m.rows(); ++r) {
    const auto u = unit(m.row(r));
    std::ranges::copy(u, out.row(r).begin());
  }
  return out;
}

// Shared by the cosine prototype classifier and the imprinted classifier so
// that zero fine-tuning steps give the same predictions bit for bit.
std::vector<Index> classify_by_cosine(const Matrix& class_rows, const EmbeddingSet& set,
                                      const Episode& episode) {
  const Matrix weights = normalized_rows(class_rows);
  std::vector<Index> out;
  out.reserve(episode.query_count());
  for (const Index q : episode.query_indices) {
    const auto x = unit(set.vectors.row(q));
    Index best = 0;
    double best_score = -INFINITY;
    for (Index c = 0; c < weights.rows(); ++c) {
      const double score = kernels::dot(weights.row(c), x);
      if (score > best_score) {
        best_score = score;
        best = c;
      }
    }
    out.push_back(best);
  }
  return out;
}

}  // namespace

std::string_view to_string(Metric metric) {
  return metric == Metric::kEuclidean ? "euclidean" : "cosine";
}

Metric parse_metric(std::string_view name) {
  if (name == "euclidean") return Metric::kEuclidean;
  if (name == "cosine") return Metric::kCosine;
  throw Error(ErrorCode::kInvalidArgument, "unknown metric: " + std::string(name));
}

PrototypeSet build_prototypes(const EmbeddingSet& set, const Episode& episode, Metric metric) {
  validate(episode, set.size());
  PrototypeSet protos{Matrix(episode.n_way, set.dim()), metric};
  std::vector<double> counts(episode.n_way, 0.0);
  for (Index s = 0; s < episode.support_count(); ++s) {
    const Index c = episode.support_labels[s];
    kernels::axpy(1.0, set.vectors.row(episode.support_indices[s]), protos.prototypes.row(c));
    counts[c] += 1.0;
  }
  for (Index c = 0; c < episode.n_way; ++c)
    for (double& x : protos.prototypes.row(c)) x /= counts[c];
  return protos;
}

std::vector<Index> prototypical_classify(const EmbeddingSet& set, const Episode& episode,
                                         Metric metric) {
  const PrototypeSet protos = build_prototypes(set, episode, metric);
  if (metric == Metric::kCosine) {
    return classify_by_cosine(normalized_rows(protos.prototypes), set, episode);
  }

  std::vector<Index> out;
  out.reserve(episode.query_count());
  std::vector<double> diff(set.dim());
  for (const Index q : episode.query_indices) {
    const auto x = set.vectors.row(q);
    Index best = 0;
    double best_dist = INFINITY;
    for (Index c = 0; c < protos.prototypes.rows(); ++c) {
      const auto p = protos.prototypes.row(c);
      for (Index k = 0; k < diff.size(); ++k) diff[k] = x[k] - p[k];
      const double dist = kernels::squared_norm(diff);
      if (dist < best_dist) {
        best_dist = dist;
        best = c;
      }
    }
    out.push_back(best);
  }
  return out;
}

ImprintedClassifier imprint_and_finetune_weights(const EmbeddingSet& set, const Episode& episode,
                                                 const ImprintConfig& config) {
  const PrototypeSet protos = build_prototypes(set, episode, Metric::kCosine);
  ImprintedClassifier clf{normalized_rows(protos.prototypes), config.scale};
  if (config.steps == 0) return clf;

  const Index classes = episode.n_way;
  const Index shots = episode.support_count();
  const Index dim = set.dim();
  Matrix support_units(shots, dim);
  for (Index s = 0; s < shots; ++s) {
    std::ranges::copy(unit(set.vectors.row(episode.support_indices[s])),
                      support_units.row(s).begin());
  }

  A2lpConfig adam_config;
  adam_config.learning_rate = config.learning_rate;
  AdamState state = AdamState::zeros(classes, dim);
  Matrix grad(classes, dim);
  std::vector<double> cosines(classes);
  std::vector<double> probs(classes);
  std::vector<double> weight_norm(classes);

  for (Index step = 0; step < config.steps; ++step) {
    std::ranges::fill(grad.values(), 0.0);
    for (Index c = 0; c < classes; ++c) {
      weight_norm[c] = std::sqrt(kernels::squared_norm(clf.weights.row(c)));
    }
    for (Index s = 0; s < shots; ++s) {
      const auto x = support_units.row(s);
      double top = -INFINITY;
      for (Index c = 0; c < classes; ++c) {
        cosines[c] = kernels::dot(clf.weights.row(c), x) / weight_norm[c];
        top = std::max(top, config.scale * cosines[c]);
      }
      double total = 0.0;
      for (Index c = 0; c < classes; ++c) {
        probs[c] = std::exp(config.scale * cosines[c] - top);
        total += probs[c];
      }
      for (Index c = 0; c < classes; ++c) {
        const double target = episode.support_labels[s] == c ? 1.0 : 0.0;
        // d/dw cos(w, x) = x / |w| - cos w / |w|^2 for unit x.
        const double g = (probs[c] / total - target) * config.scale / static_cast<double>(shots);
        kernels::axpy(g / weight_norm[c], x, grad.row(c));
        kernels::axpy(-g * cosines[c] / (weight_norm[c] * weight_norm[c]), clf.weights.row(c),
                      grad.row(c));
      }
    }
    adam_step(clf.weights, grad, state, adam_config);
  }
  return clf;
}

std::vector<Index> imprint_and_finetune(const EmbeddingSet& set, const Episode& episode,
                                        const ImprintConfig& config) {
  const ImprintedClassifier clf = imprint_and_finetune_weights(set, episode, config);
  return classify_by_cosine(clf.weights, set, episode);
}

std::vector<Index> plain_lp_classify(const EmbeddingSet& set, const Episode& episode,
                                     const A2lpConfig& config) {
  validate(episode, set.size());
  const EmbeddingSet local = gather_rows(set, episode.row_order());
  const PropagationGraph graph = build_graph(local.vectors, config.graph);
  const LabelMatrix labels = build_label_matrix(episode.localized());
  return predict(propagate(graph, labels, config.alpha), labels.support_count);
}

}  // namespace a2lp
