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

#ifndef A2LP_BASELINES_HPP_
#define A2LP_BASELINES_HPP_

#include <string_view>
#include <vector>

#include "a2lp/adaptation.hpp"
#include "a2lp/embedding_io.hpp"
#include "a2lp/episode.hpp"
#include "a2lp/matrix.hpp"

namespace a2lp {

enum class Metric { kEuclidean, kCosine };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view name);

struct PrototypeSet {
  Matrix prototypes;  // N x d, one class mean per row
  Metric metric = Metric::kEuclidean;
};

// Class means of the support vectors.
PrototypeSet build_prototypes(const EmbeddingSet& set, const Episode& episode, Metric metric);

// Nearest prototype per query: smallest squared distance, or largest cosine.
// Ties go to the lowest class index.
std::vector<Index> prototypical_classify(const EmbeddingSet& set, const Episode& episode,
                                         Metric metric = Metric::kEuclidean);

struct ImprintConfig {
  Index steps = 100;
  double learning_rate = 0.01;
  double scale = 10.0;
};

struct ImprintedClassifier {
  Matrix weights;  // N x d
  double scale = 10.0;
};

// Weights start as l2-normalized prototypes, then full-batch Adam minimizes
// the mean support cross-entropy of scale * cos(w_c, x). Embeddings stay
// fixed. Queries go to the largest cosine logit.
ImprintedClassifier imprint_and_finetune_weights(const EmbeddingSet& set, const Episode& episode,
                                                 const ImprintConfig& config);
std::vector<Index> imprint_and_finetune(const EmbeddingSet& set, const Episode& episode,
                                        const ImprintConfig& config = {});

// Graph, propagation and argmax with no anchor adaptation.
std::vector<Index> plain_lp_classify(const EmbeddingSet& set, const Episode& episode,
                                     const A2lpConfig& config);

}  // namespace a2lp

#endif  // A2LP_BASELINES_HPP_
