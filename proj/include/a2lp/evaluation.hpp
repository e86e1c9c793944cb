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

#ifndef A2LP_EVALUATION_HPP_
#define A2LP_EVALUATION_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "a2lp/adaptation.hpp"
#include "a2lp/baselines.hpp"
#include "a2lp/embedding_io.hpp"
#include "a2lp/episode.hpp"

namespace a2lp {

// Samples N classes without replacement from those with at least K + M
// members, then K + M members per class without replacement. Class ids are
// remapped to 0..N-1 in sampled order. Deterministic in `seed`.
Episode sample_episode(const EmbeddingSet& set, Index n_way, Index k_shot, Index m_query,
                       std::uint64_t seed);

struct SyntheticTaskSpec {
  Index n_way = 5;
  Index k_shot = 1;
  Index m_query = 15;
  Index dim = 64;
  double between_class_scale = 1.0;
  // Puts plain LP at about 72% on 5-way 1-shot with d = 64, leaving headroom
  // on both sides. Measured once; the acceptance suite pins the value.
  double within_class_scale = 2.2;
  std::uint64_t seed = 0;
};

struct SyntheticTask {
  EmbeddingSet set;  // supports first, then queries, each block grouped by class
  Episode episode;   // already local: indices address `set` directly
};

// Class means ~ N(0, sb^2 I), members ~ N(mean, sw^2 I).
SyntheticTask generate_synthetic(const SyntheticTaskSpec& spec);

// Fraction of positions where predicted == truth.
double score(std::span<const Index> predicted, std::span<const Index> truth);

enum class Method { kPrototypical, kImprint, kLp, kA2lp };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);
// Comma-separated, e.g. "proto,imprint,lp,a2lp". Duplicates are rejected.
std::vector<Method> parse_method_list(std::string_view list);

// Where PLC centering statistics come from: the episode's own rows, or the
// whole embedding file (synthetic sources are always per episode).
enum class PlcScope { kEpisode, kGlobal };

std::string_view to_string(PlcScope scope);
PlcScope parse_plc_scope(std::string_view name);

struct BenchmarkConfig {
  std::vector<Method> methods = {Method::kPrototypical, Method::kImprint, Method::kLp,
                                 Method::kA2lp};
  Index episodes = 1000;
  std::uint64_t base_seed = 0;
  Index n_way = 5;
  Index k_shot = 1;
  Index m_query = 15;
  A2lpConfig a2lp;
  ImprintConfig imprint;
  Metric proto_metric = Metric::kEuclidean;
  PlcScope plc_scope = PlcScope::kEpisode;
  Index jobs = 1;
};

struct ConfidenceInterval {
  double mean = 0.0;
  double half_width = 0.0;  // 1.96 * sample stddev / sqrt(n); 0 when n < 2
};

ConfidenceInterval confidence_interval(std::span<const double> samples);

struct MethodSummary {
  Method method = Method::kLp;
  std::vector<double> accuracies;  // percent, one per episode in episode order
  ConfidenceInterval accuracy;     // percent
  // Anchor cross-entropy before the first and after the last update (A2LP).
  std::optional<double> mean_initial_loss;
  std::optional<double> mean_final_loss;
};

struct BenchmarkReport {
  std::vector<MethodSummary> methods;
  Index episodes = 0;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::string> warnings;
  double wall_time_seconds = 0.0;
};

using BenchmarkSource = std::variant<std::reference_wrapper<const EmbeddingSet>, SyntheticTaskSpec>;

// Every method sees the same episodes; episode i uses seed base_seed + i.
// Episodes run on `jobs` threads; the report does not depend on `jobs`.
BenchmarkReport run_benchmark(const BenchmarkSource& source, const BenchmarkConfig& config);

// Neither rendering includes wall time, so reports compare byte for byte.
std::string format_table(const BenchmarkReport& report);
std::string format_key_values(const BenchmarkReport& report);

}  // namespace a2lp

#endif  // A2LP_EVALUATION_HPP_
