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

#include "a2lp/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "a2lp/error.hpp"
#include "a2lp/kernels.hpp"

namespace a2lp {
namespace {

struct ForwardPass {
  Matrix similarity;
  PropagationGraph graph;
  std::unique_ptr<PropagationSystem> system;
  SimilarityMatrix z;
  AnchorProbabilities probabilities;
  double loss = 0.0;
};

ForwardPass forward(const Matrix& vectors, const LabelMatrix& labels, const A2lpConfig& config,
                    const KnnMask* frozen_mask = nullptr) {
  if (vectors.rows() != labels.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "vector rows differ from label rows");
  }
  if (vectors.rows() < 2 || config.graph.k >= vectors.rows()) {
    throw Error(ErrorCode::kInvalidArgument,
                "k exceeds candidate count (k=" + std::to_string(config.graph.k) +
                    ", T=" + std::to_string(vectors.rows()) + ")");
  }
  ForwardPass pass;
  pass.similarity = cosine_matrix(vectors);
  const KnnMask mask =
      frozen_mask ? *frozen_mask : select_neighbours(pass.similarity, config.graph.k);
  pass.graph = normalize_graph(affinity_from_mask(pass.similarity, mask, config.graph.gamma));
  pass.system = std::make_unique<PropagationSystem>(pass.graph, config.alpha);
  pass.z = {pass.system->solve(labels.values), config.alpha};
  pass.probabilities = anchor_softmax(pass.z, labels.support_count, config.tau);
  pass.loss = anchor_cross_entropy(pass.probabilities, labels);
  return pass;
}

Matrix backward(const ForwardPass& pass, const Matrix& vectors, const LabelMatrix& labels,
                const A2lpConfig& config) {
  const Index n = vectors.rows();
  const Index anchors = labels.support_count;
  const Index classes = labels.classes();
  const Matrix& z = pass.z.values;
  const Matrix& p = pass.probabilities.values;

  // dL/dZ: tau (P - Y) on anchor rows, zero on query rows.
  Matrix grad_z(n, classes);
  for (Index i = 0; i < anchors; ++i)
    for (Index c = 0; c < classes; ++c)
      grad_z(i, c) = config.tau * (p(i, c) - labels.values(i, c));

  // Z = M^-1 Y with M = I - alpha W_norm symmetric, so dL/dW_norm = alpha U Z^T
  // where M U = dL/dZ.
  const Matrix u = pass.system->solve(grad_z);
  Matrix grad_wn(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) grad_wn(i, j) = config.alpha * kernels::dot(u.row(i), z.row(j));

  // W_norm_ij = W_ij s_i s_j with s = deg^-1/2 and deg_i = sum_j W_ij.
  const auto& degree = pass.graph.degree;
  std::vector<double> s(n);
  for (Index i = 0; i < n; ++i) s[i] = 1.0 / std::sqrt(degree[i]);

  std::vector<double> grad_deg(n, 0.0);
  const SparseMatrix& w = pass.graph.adjacency;
  for (Index i = 0; i < n; ++i) {
    const auto idx = w.row_indices(i);
    const auto val = w.row_values(i);
    double grad_s = 0.0;
    for (Index e = 0; e < idx.size(); ++e) {
      const Index j = idx[e];
      grad_s += (grad_wn(i, j) + grad_wn(j, i)) * val[e] * s[j];
    }
    grad_deg[i] = -0.5 * s[i] * s[i] * s[i] * grad_s;
  }
  const auto grad_w = [&](Index i, Index j) {
    return grad_wn(i, j) * s[i] * s[j] + grad_deg[i];
  };

  const Index dim = vectors.cols();
  Matrix grad(anchors, dim);
  std::vector<double> self_coeff(anchors, 0.0);
  std::vector<double> norm(n);
  for (Index i = 0; i < n; ++i) norm[i] = std::sqrt(kernels::squared_norm(vectors.row(i)));

  const double gamma = config.graph.gamma;
  const KnnMask& mask = pass.graph.knn_mask;
  for (Index i = 0; i < n; ++i) {
    for (const Index j : mask.row(i)) {
      if (i >= anchors && j >= anchors) continue;
      const double c = pass.similarity(i, j);
      if (!(c > 0.0)) continue;  // subgradient of the clamp is 0
      // A_ij feeds W_ij and W_ji with weight 1/2 each.
      const double grad_a = 0.5 * (grad_w(i, j) + grad_w(j, i));
      const double grad_c = grad_a * gamma * std::pow(c, gamma - 1.0);
      const double cross = grad_c / (norm[i] * norm[j]);
      if (i < anchors) {
        kernels::axpy(cross, vectors.row(j), grad.row(i));
        self_coeff[i] -= grad_c * c / (norm[i] * norm[i]);
      }
      if (j < anchors) {
        kernels::axpy(cross, vectors.row(i), grad.row(j));
        self_coeff[j] -= grad_c * c / (norm[j] * norm[j]);
      }
    }
  }
  for (Index i = 0; i < anchors; ++i) kernels::axpy(self_coeff[i], vectors.row(i), grad.row(i));
  return grad;
}

double frobenius_distance(const Matrix& a, const Matrix& b) {
  double sum = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (Index e = 0; e < av.size(); ++e) sum += (av[e] - bv[e]) * (av[e] - bv[e]);
  return std::sqrt(sum);
}

double accuracy(const std::vector<Index>& predicted, const std::vector<Index>& truth) {
  Index hits = 0;
  for (Index i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return truth.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgd;
  throw Error(ErrorCode::kInvalidArgument, "unknown optimizer: " + std::string(name));
}

void A2lpConfig::validate() const {
  const auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, what);
  };
  if (graph.k == 0) fail("k must be positive");
  if (!(graph.gamma > 0.0)) fail("gamma must be positive");
  if (!(alpha >= 0.0 && alpha < 1.0)) fail("alpha must lie in [0, 1)");
  if (!(tau > 0.0)) fail("tau must be positive");
  if (!(learning_rate > 0.0)) fail("learning rate must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) fail("adam beta1 must lie in [0, 1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) fail("adam beta2 must lie in [0, 1)");
  if (!(adam_epsilon >= 0.0)) fail("adam epsilon must be nonnegative");
}

AnchorProbabilities anchor_softmax(const SimilarityMatrix& z, Index support_count, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tau must be positive");
  const Index classes = z.values.cols();
  AnchorProbabilities p{Matrix(support_count, classes), Matrix(support_count, classes)};
  for (Index i = 0; i < support_count; ++i) {
    const auto row = z.values.row(i);
    const auto top = static_cast<Index>(std::max_element(row.begin(), row.end()) - row.begin());
    double rest = 0.0;
    for (Index c = 0; c < classes; ++c)
      if (c != top) rest += std::exp(tau * (row[c] - row[top]));
    const double log_norm = std::log1p(rest);
    for (Index c = 0; c < classes; ++c) {
      const double shifted = tau * (row[c] - row[top]);
      p.log_values(i, c) = shifted - log_norm;
      p.values(i, c) = std::exp(shifted) / (1.0 + rest);
    }
  }
  return p;
}

double anchor_cross_entropy(const AnchorProbabilities& p, const LabelMatrix& labels) {
  const Index anchors = p.values.rows();
  if (anchors != labels.support_count || p.values.cols() != labels.classes()) {
    throw Error(ErrorCode::kDimensionMismatch, "anchor probabilities do not match labels");
  }
  const bool have_logs = p.log_values.rows() == anchors && p.log_values.cols() == p.values.cols();
  double loss = 0.0;
  for (Index i = 0; i < anchors; ++i) {
    for (Index c = 0; c < labels.classes(); ++c) {
      const double y = labels.values(i, c);
      if (y == 0.0) continue;
      const double log_p =
          have_logs ? p.log_values(i, c) : std::log(std::max(p.values(i, c), 1e-300));
      loss -= y * log_p;
    }
  }
  return loss;
}

AnchorGradient anchor_gradient(const Matrix& vectors, const LabelMatrix& labels,
                               const A2lpConfig& config) {
  const ForwardPass pass = forward(vectors, labels, config);
  return {backward(pass, vectors, labels, config), pass.loss};
}

double anchor_loss(const Matrix& vectors, const LabelMatrix& labels, const A2lpConfig& config,
                   const KnnMask* frozen_mask) {
  return forward(vectors, labels, config, frozen_mask).loss;
}

void adam_step(Matrix& anchors, const Matrix& gradient, AdamState& state,
               const A2lpConfig& config) {
  if (anchors.rows() != gradient.rows() || anchors.cols() != gradient.cols() ||
      state.first_moment.rows() != anchors.rows() ||
      state.first_moment.cols() != anchors.cols() ||
      state.second_moment.rows() != anchors.rows() ||
      state.second_moment.cols() != anchors.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "adam_step: shape mismatch");
  }
  ++state.step_count;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(b1, t);
  const double correction2 = 1.0 - std::pow(b2, t);
  auto x = anchors.values();
  auto m = state.first_moment.values();
  auto v = state.second_moment.values();
  const auto g = gradient.values();
  for (Index e = 0; e < x.size(); ++e) {
    m[e] = b1 * m[e] + (1.0 - b1) * g[e];
    v[e] = b2 * v[e] + (1.0 - b2) * g[e] * g[e];
    const double m_hat = m[e] / correction1;
    const double v_hat = v[e] / correction2;
    x[e] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
  }
}

void sgd_step(Matrix& anchors, const Matrix& gradient, double learning_rate) {
  if (anchors.rows() != gradient.rows() || anchors.cols() != gradient.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "sgd_step: shape mismatch");
  }
  kernels::axpy(-learning_rate, gradient.values(), anchors.values());
}

A2lpResult run_a2lp(const Matrix& vectors, const Episode& local_episode,
                    const A2lpConfig& config, const StepObserver& observer) {
  config.validate();
  if (vectors.rows() != local_episode.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "episode has " + std::to_string(local_episode.size()) + " rows, matrix has " +
                    std::to_string(vectors.rows()));
  }
  validate(local_episode, vectors.rows());
  const LabelMatrix labels = build_label_matrix(local_episode);
  const Index anchors = labels.support_count;

  A2lpResult result;
  result.vectors = vectors;
  const Matrix initial_anchors = vectors.row_block(0, anchors);
  Matrix current = initial_anchors;
  AdamState adam = AdamState::zeros(anchors, vectors.cols());

  for (Index step = 0; step < config.steps; ++step) {
    const ForwardPass pass = forward(result.vectors, labels, config);
    const Matrix grad = backward(pass, result.vectors, labels, config);
    if (step == 0) result.initial_loss = pass.loss;

    StepRecord record;
    record.step = step + 1;
    record.loss = pass.loss;
    if (local_episode.has_query_labels()) {
      record.query_accuracy = accuracy(predict(pass.z, anchors), local_episode.query_labels);
    }

    if (config.optimizer == OptimizerKind::kAdam) {
      adam_step(current, grad, adam, config);
    } else {
      sgd_step(current, grad, config.learning_rate);
    }
    for (Index i = 0; i < anchors; ++i) {
      std::ranges::copy(current.row(i), result.vectors.row(i).begin());
    }
    record.displacement = frobenius_distance(current, initial_anchors);

    result.final_loss = pass.loss;
    result.z = pass.z;
    result.trace.push_back(record);
    if (observer) observer(record);
  }

  if (config.steps == 0 || config.final_forward_pass) {
    const ForwardPass pass = forward(result.vectors, labels, config);
    result.z = pass.z;
    result.final_loss = pass.loss;
    if (config.steps == 0) result.initial_loss = pass.loss;
  }
  result.predictions = predict(result.z, anchors);
  return result;
}

A2lpResult run_a2lp(const EmbeddingSet& set, const Episode& episode, const A2lpConfig& config,
                    const StepObserver& observer) {
  validate(episode, set.size());
  const auto order = episode.row_order();
  const EmbeddingSet local = gather_rows(set, order);
  return run_a2lp(local.vectors, episode.localized(), config, observer);
}

}  // namespace a2lp
