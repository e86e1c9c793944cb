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

#include "a2lp/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "a2lp/error.hpp"
#include "a2lp/rng.hpp"

namespace a2lp {
namespace {

struct EpisodeOutcome {
  std::vector<double> accuracy;  // percent, per method
  std::vector<double> initial_loss;
  std::vector<double> final_loss;
};

struct PreparedEpisode {
  EmbeddingSet set;
  Episode episode;  // local to `set`
};

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

std::string number(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

std::vector<std::pair<std::string, std::string>> echo(const BenchmarkConfig& c) {
  std::string methods;
  for (const Method m : c.methods) {
    if (!methods.empty()) methods += ",";
    methods += to_string(m);
  }
  const A2lpConfig& a = c.a2lp;
  return {
      {"ways", std::to_string(c.n_way)},
      {"shots", std::to_string(c.k_shot)},
      {"queries", std::to_string(c.m_query)},
      {"episodes", std::to_string(c.episodes)},
      {"seed", std::to_string(c.base_seed)},
      {"methods", methods},
      {"k", std::to_string(a.graph.k)},
      {"gamma", number(a.graph.gamma)},
      {"alpha", number(a.alpha)},
      {"tau", number(a.tau)},
      {"steps", std::to_string(a.steps)},
      {"lr", number(a.learning_rate)},
      {"optimizer", std::string(to_string(a.optimizer))},
      {"adam_beta1", number(a.adam_beta1)},
      {"adam_beta2", number(a.adam_beta2)},
      {"adam_epsilon", number(a.adam_epsilon)},
      {"final_forward_pass", a.final_forward_pass ? "true" : "false"},
      {"preprocess", std::string(to_string(a.preprocess))},
      {"plc_scope", std::string(to_string(c.plc_scope))},
      {"proto_metric", std::string(to_string(c.proto_metric))},
      {"imprint_steps", std::to_string(c.imprint.steps)},
      {"imprint_lr", number(c.imprint.learning_rate)},
      {"imprint_scale", number(c.imprint.scale)},
  };
}

PreparedEpisode prepare(const BenchmarkSource& source, const EmbeddingSet* global,
                        const BenchmarkConfig& config, std::uint64_t seed) {
  const PreprocessMode mode = config.a2lp.preprocess;
  if (const auto* spec = std::get_if<SyntheticTaskSpec>(&source)) {
    SyntheticTaskSpec s = *spec;
    s.n_way = config.n_way;
    s.k_shot = config.k_shot;
    s.m_query = config.m_query;
    s.seed = seed;
    SyntheticTask task = generate_synthetic(s);
    return {preprocess(std::move(task.set), mode), std::move(task.episode)};
  }
  const EmbeddingSet& set = global ? *global : std::get<0>(source).get();
  const Episode episode = sample_episode(set, config.n_way, config.k_shot, config.m_query, seed);
  EmbeddingSet local = gather_rows(set, episode.row_order());
  if (!global) local = preprocess(std::move(local), mode);
  return {std::move(local), episode.localized()};
}

EpisodeOutcome evaluate(const PreparedEpisode& prepared, const BenchmarkConfig& config) {
  const Episode& episode = prepared.episode;
  EpisodeOutcome out;
  for (const Method method : config.methods) {
    std::vector<Index> predicted;
    double initial = 0.0;
    double final = 0.0;
    switch (method) {
      case Method::kPrototypical:
        predicted = prototypical_classify(prepared.set, episode, config.proto_metric);
        break;
      case Method::kImprint:
        predicted = imprint_and_finetune(prepared.set, episode, config.imprint);
        break;
      case Method::kLp:
        predicted = plain_lp_classify(prepared.set, episode, config.a2lp);
        break;
      case Method::kA2lp: {
        const A2lpResult r = run_a2lp(prepared.set.vectors, episode, config.a2lp);
        predicted = r.predictions;
        initial = r.initial_loss;
        final = r.final_loss;
        break;
      }
    }
    out.accuracy.push_back(100.0 * score(predicted, episode.query_labels));
    out.initial_loss.push_back(initial);
    out.final_loss.push_back(final);
  }
  return out;
}

}  // namespace

Episode sample_episode(const EmbeddingSet& set, Index n_way, Index k_shot, Index m_query,
                       std::uint64_t seed) {
  if (!set.has_labels()) {
    throw Error(ErrorCode::kInsufficientData, "episode sampling needs labelled embeddings");
  }
  if (n_way == 0 || k_shot == 0) {
    throw Error(ErrorCode::kInvalidArgument, "ways and shots must be positive");
  }
  std::map<std::int64_t, std::vector<Index>> members;
  for (Index r = 0; r < set.size(); ++r) members[set.labels[r]].push_back(r);
  const Index needed = k_shot + m_query;
  std::vector<std::int64_t> eligible;
  for (const auto& [label, rows] : members)
    if (rows.size() >= needed) eligible.push_back(label);
  if (eligible.size() < n_way) {
    throw Error(ErrorCode::kInsufficientData,
                "need " + std::to_string(n_way) + " classes with at least " +
                    std::to_string(needed) + " members each, found " +
                    std::to_string(eligible.size()) + " (of " + std::to_string(members.size()) +
                    " classes)");
  }

  Rng rng(seed);
  rng.partial_shuffle(std::span(eligible), n_way);
  Episode episode;
  episode.n_way = n_way;
  episode.k_shot = k_shot;
  episode.m_query = m_query;
  for (Index c = 0; c < n_way; ++c) {
    std::vector<Index> rows = members[eligible[c]];
    rng.partial_shuffle(std::span(rows), needed);
    for (Index s = 0; s < k_shot; ++s) {
      episode.support_indices.push_back(rows[s]);
      episode.support_labels.push_back(c);
    }
    for (Index q = 0; q < m_query; ++q) {
      episode.query_indices.push_back(rows[k_shot + q]);
      episode.query_labels.push_back(c);
    }
  }
  return episode;
}

SyntheticTask generate_synthetic(const SyntheticTaskSpec& spec) {
  if (spec.n_way == 0 || spec.k_shot == 0 || spec.dim == 0) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic spec needs positive ways, shots and dim");
  }
  if (!(spec.between_class_scale >= 0.0) || !(spec.within_class_scale >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic scales must be nonnegative");
  }
  Rng rng(spec.seed);
  const Index per_class = spec.k_shot + spec.m_query;
  Matrix vectors(spec.n_way * per_class, spec.dim);
  std::vector<std::int64_t> labels;
  std::vector<double> mean(spec.dim);
  Episode episode;
  episode.n_way = spec.n_way;
  episode.k_shot = spec.k_shot;
  episode.m_query = spec.m_query;
  for (Index c = 0; c < spec.n_way; ++c) {
    for (double& m : mean) m = spec.between_class_scale * rng.normal();
    for (Index member = 0; member < per_class; ++member) {
      const Index r = c * per_class + member;
      auto row = vectors.row(r);
      for (Index k = 0; k < spec.dim; ++k) row[k] = mean[k] + spec.within_class_scale * rng.normal();
      labels.push_back(static_cast<std::int64_t>(c));
      if (member < spec.k_shot) {
        episode.support_indices.push_back(r);
        episode.support_labels.push_back(c);
      } else {
        episode.query_indices.push_back(r);
        episode.query_labels.push_back(c);
      }
    }
  }
  EmbeddingSet set = make_embedding_set(std::move(vectors), std::move(labels));
  // Supports first, then queries: the propagation row convention.
  const auto order = episode.row_order();
  return {gather_rows(set, order), episode.localized()};
}

double score(std::span<const Index> predicted, std::span<const Index> truth) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "score: " + std::to_string(predicted.size()) + " predictions for " +
                    std::to_string(truth.size()) + " labels");
  }
  if (truth.empty()) return 0.0;
  Index hits = 0;
  for (Index i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kPrototypical: return "proto";
    case Method::kImprint: return "imprint";
    case Method::kLp: return "lp";
    case Method::kA2lp: return "a2lp";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "proto") return Method::kPrototypical;
  if (name == "imprint") return Method::kImprint;
  if (name == "lp") return Method::kLp;
  if (name == "a2lp") return Method::kA2lp;
  throw Error(ErrorCode::kInvalidArgument, "unknown method: " + std::string(name));
}

std::vector<Method> parse_method_list(std::string_view list) {
  std::vector<Method> methods;
  while (!list.empty()) {
    const auto comma = list.find(',');
    const Method m = parse_method(list.substr(0, comma));
    if (std::ranges::find(methods, m) != methods.end()) {
      throw Error(ErrorCode::kInvalidArgument, "method listed twice: " + std::string(to_string(m)));
    }
    methods.push_back(m);
    if (comma == std::string_view::npos) break;
    list.remove_prefix(comma + 1);
  }
  if (methods.empty()) throw Error(ErrorCode::kInvalidArgument, "empty method list");
  return methods;
}

std::string_view to_string(PlcScope scope) {
  return scope == PlcScope::kEpisode ? "episode" : "global";
}

PlcScope parse_plc_scope(std::string_view name) {
  if (name == "episode") return PlcScope::kEpisode;
  if (name == "global") return PlcScope::kGlobal;
  throw Error(ErrorCode::kInvalidArgument, "unknown PLC scope: " + std::string(name));
}

ConfidenceInterval confidence_interval(std::span<const double> samples) {
  ConfidenceInterval ci;
  const Index n = samples.size();
  if (n == 0) return ci;
  double sum = 0.0;
  for (const double x : samples) sum += x;
  ci.mean = sum / static_cast<double>(n);
  if (n < 2) return ci;
  double ss = 0.0;
  for (const double x : samples) ss += (x - ci.mean) * (x - ci.mean);
  const double stddev = std::sqrt(ss / static_cast<double>(n - 1));
  ci.half_width = 1.96 * stddev / std::sqrt(static_cast<double>(n));
  return ci;
}

BenchmarkReport run_benchmark(const BenchmarkSource& source, const BenchmarkConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  if (config.episodes == 0) throw Error(ErrorCode::kInvalidArgument, "episodes must be >= 1");
  if (config.methods.empty()) throw Error(ErrorCode::kInvalidArgument, "no methods requested");
  config.a2lp.validate();

  // Global PLC statistics are computed once over the whole file.
  std::optional<EmbeddingSet> global;
  if (config.plc_scope == PlcScope::kGlobal && config.a2lp.preprocess == PreprocessMode::kPlc) {
    if (const auto* set = std::get_if<0>(&source)) {
      global = plc_preprocess(set->get());
    }
  }
  const EmbeddingSet* global_ptr = global ? &*global : nullptr;

  std::vector<EpisodeOutcome> outcomes(config.episodes);
  std::vector<std::exception_ptr> failures(config.episodes);
  std::atomic<Index> next{0};
  const auto worker = [&] {
    for (Index i = next++; i < config.episodes; i = next++) {
      const std::uint64_t seed = config.base_seed + i;
      try {
        outcomes[i] = evaluate(prepare(source, global_ptr, config, seed), config);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const Index jobs = std::clamp<Index>(config.jobs, 1, config.episodes);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(jobs);
    for (Index t = 0; t < jobs; ++t) threads.emplace_back(worker);
  }

  for (Index i = 0; i < config.episodes; ++i) {
    if (!failures[i]) continue;
    const std::string where = "episode " + std::to_string(i) + " (seed " +
                              std::to_string(config.base_seed + i) + "): ";
    try {
      std::rethrow_exception(failures[i]);
    } catch (const Error& e) {
      throw Error(e.code(), where + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kInternal, where + e.what());
    }
  }

  BenchmarkReport report;
  report.episodes = config.episodes;
  report.config = echo(config);
  for (Index m = 0; m < config.methods.size(); ++m) {
    MethodSummary summary;
    summary.method = config.methods[m];
    double initial = 0.0;
    double final = 0.0;
    for (const EpisodeOutcome& o : outcomes) {
      summary.accuracies.push_back(o.accuracy[m]);
      initial += o.initial_loss[m];
      final += o.final_loss[m];
    }
    summary.accuracy = confidence_interval(summary.accuracies);
    if (summary.method == Method::kA2lp) {
      summary.mean_initial_loss = initial / static_cast<double>(config.episodes);
      summary.mean_final_loss = final / static_cast<double>(config.episodes);
    }
    report.methods.push_back(std::move(summary));
  }
  if (config.episodes == 1) {
    report.warnings.push_back("single episode: confidence interval is degenerate, reported as 0");
  }
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

std::string format_table(const BenchmarkReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %12s %10s %10s\n", "method", "accuracy(%)",
                "ci95(%)", "episodes");
  out << line;
  for (const MethodSummary& m : report.methods) {
    std::snprintf(line, sizeof(line), "%-10s %12.2f %10s %10zu\n",
                  std::string(to_string(m.method)).c_str(), m.accuracy.mean,
                  ("+-" + fixed(m.accuracy.half_width, 2)).c_str(), report.episodes);
    out << line;
  }
  for (const MethodSummary& m : report.methods) {
    if (m.mean_initial_loss) {
      std::snprintf(line, sizeof(line), "%s mean anchor loss: initial %.6e -> final %.6e\n",
                    std::string(to_string(m.method)).c_str(), *m.mean_initial_loss,
                    *m.mean_final_loss);
      out << line;
    }
  }
  for (const std::string& w : report.warnings) out << "warning: " << w << '\n';
  return out.str();
}

std::string format_key_values(const BenchmarkReport& report) {
  std::ostringstream out;
  for (const auto& [key, value] : report.config) out << "config." << key << '=' << value << '\n';
  for (const MethodSummary& m : report.methods) {
    out << "method=" << to_string(m.method) << " accuracy=" << fixed(m.accuracy.mean, 4)
        << " ci95=" << fixed(m.accuracy.half_width, 4) << " episodes=" << report.episodes;
    if (m.mean_initial_loss) {
      out << " initial_loss=" << number(*m.mean_initial_loss)
          << " final_loss=" << number(*m.mean_final_loss);
    }
    out << '\n';
  }
  for (const std::string& w : report.warnings) out << "warning=" << w << '\n';
  return out.str();
}

}  // namespace a2lp
