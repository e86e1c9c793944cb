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

#ifndef A2LP_ADAPTATION_HPP_
#define A2LP_ADAPTATION_HPP_

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "a2lp/embedding_io.hpp"
#include "a2lp/episode.hpp"
#include "a2lp/graph.hpp"
#include "a2lp/matrix.hpp"
#include "a2lp/propagation.hpp"

namespace a2lp {

enum class OptimizerKind { kAdam, kSgd };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

struct A2lpConfig {
  GraphConfig graph;
  double alpha = 0.8;
  double tau = 15.0;
  Index steps = 1000;
  double learning_rate = 1e-4;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  // Re-propagate with the final anchors before predicting. When false the
  // prediction uses Z from the last loop iteration, before its update.
  bool final_forward_pass = true;
  PreprocessMode preprocess = PreprocessMode::kL2;

  void validate() const;
};

struct AdamState {
  Matrix first_moment;
  Matrix second_moment;
  Index step_count = 0;

  static AdamState zeros(Index rows, Index cols) {
    return {Matrix(rows, cols), Matrix(rows, cols), 0};
  }
};

// Row-wise softmax of tau * Z over the anchor rows. log_values holds the
// matching log-probabilities, evaluated without forming the quotient.
struct AnchorProbabilities {
  Matrix values;
  Matrix log_values;
};

AnchorProbabilities anchor_softmax(const SimilarityMatrix& z, Index support_count, double tau);

// -sum_i sum_j Y_ij log P_ij over the anchor rows (summed, not averaged).
double anchor_cross_entropy(const AnchorProbabilities& p, const LabelMatrix& labels);

struct AnchorGradient {
  Matrix gradient;  // support_count x d
  double loss = 0.0;
};

// Loss and its exact gradient with respect to the anchor rows of `vectors`
// (the first labels.support_count rows). The kNN selection of the current
// point is held fixed; everything downstream of it is differentiated:
// cosine, clamp and power, symmetrization, degree normalization, the linear
// solve, softmax and cross-entropy. Query rows receive no gradient.
AnchorGradient anchor_gradient(const Matrix& vectors, const LabelMatrix& labels,
                               const A2lpConfig& config);

// Forward loss only. With `frozen_mask` the neighbour selection is taken
// from it instead of being recomputed from `vectors`.
double anchor_loss(const Matrix& vectors, const LabelMatrix& labels, const A2lpConfig& config,
                   const KnnMask* frozen_mask = nullptr);

// Bias-corrected Adam update of `anchors` in place.
void adam_step(Matrix& anchors, const Matrix& gradient, AdamState& state,
               const A2lpConfig& config);

void sgd_step(Matrix& anchors, const Matrix& gradient, double learning_rate);

struct StepRecord {
  Index step = 0;       // 1-based
  double loss = 0.0;    // before this step's update
  double displacement = 0.0;  // ||V_S - V_S^(0)||_F after the update
  std::optional<double> query_accuracy;  // from this step's Z, when labels are known
};

struct A2lpResult {
  std::vector<Index> predictions;  // one per query, in episode order
  SimilarityMatrix z;
  Matrix vectors;  // final episode matrix; only anchor rows differ from the input
  std::vector<StepRecord> trace;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

using StepObserver = std::function<void(const StepRecord&)>;

// Adaptive anchor label propagation on an already preprocessed episode
// matrix whose rows follow `episode.row_order()` after localization: the
// first support_count rows are the anchors. steps = 0 is plain LP.
A2lpResult run_a2lp(const Matrix& vectors, const Episode& local_episode,
                    const A2lpConfig& config, const StepObserver& observer = {});

// Gathers the episode's rows from `set` (no preprocessing) and runs the above.
A2lpResult run_a2lp(const EmbeddingSet& set, const Episode& episode, const A2lpConfig& config,
                    const StepObserver& observer = {});

}  // namespace a2lp

#endif  // A2LP_ADAPTATION_HPP_
