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

#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "a2lp/adaptation.hpp"
#include "a2lp/embedding_io.hpp"
#include "a2lp/error.hpp"
#include "a2lp/evaluation.hpp"
#include "a2lp/graph.hpp"
#include "a2lp/rng.hpp"

namespace a2lp::cli {
namespace {

// Flags shared by every subcommand that runs the propagation pipeline.
struct AlgorithmFlags {
  A2lpConfig config;
  std::string optimizer = "adam";
  std::string preprocess = "l2";
  bool no_final_forward = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("-k,--k", config.graph.k, "neighbours per vertex")->capture_default_str();
    cmd->add_option("--gamma", config.graph.gamma, "exponent on the clamped cosine")
        ->capture_default_str();
    cmd->add_option("--alpha", config.alpha, "propagation weight in [0, 1)")
        ->capture_default_str();
    cmd->add_option("--tau", config.tau, "anchor softmax scale")->capture_default_str();
    cmd->add_option("--steps", config.steps, "anchor adaptation steps (0 = plain LP)")
        ->capture_default_str();
    cmd->add_option("--lr", config.learning_rate, "anchor learning rate")->capture_default_str();
    cmd->add_option("--optimizer", optimizer, "adam or sgd")
        ->check(CLI::IsMember({"adam", "sgd"}))
        ->capture_default_str();
    cmd->add_option("--adam-beta1", config.adam_beta1, "Adam first-moment decay")
        ->capture_default_str();
    cmd->add_option("--adam-beta2", config.adam_beta2, "Adam second-moment decay")
        ->capture_default_str();
    cmd->add_option("--adam-eps", config.adam_epsilon, "Adam denominator epsilon")
        ->capture_default_str();
    cmd->add_flag("--no-final-forward", no_final_forward,
                  "predict from Z of the last loop iteration instead of re-propagating");
    cmd->add_option("--preprocess", preprocess, "none, l2 or plc")
        ->check(CLI::IsMember({"none", "l2", "plc"}))
        ->capture_default_str();
  }

  A2lpConfig resolve() const {
    A2lpConfig c = config;
    c.optimizer = parse_optimizer(optimizer);
    c.preprocess = parse_preprocess_mode(preprocess);
    c.final_forward_pass = !no_final_forward;
    c.validate();
    return c;
  }
};

std::string number(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

// ---------------------------------------------------------------- bench

struct BenchFlags {
  AlgorithmFlags algorithm;
  std::string embeddings;
  bool synthetic = false;
  SyntheticTaskSpec spec;
  BenchmarkConfig bench;
  std::string methods = "proto,imprint,lp,a2lp";
  std::string proto_metric = "euclidean";
  std::string plc_scope = "episode";
  std::string output = "both";
  bool timing = false;
};

void add_bench(CLI::App& app, BenchFlags& f) {
  CLI::App* cmd = app.add_subcommand("bench", "mean accuracy and 95% CI over sampled episodes");
  auto* emb = cmd->add_option("--embeddings", f.embeddings,
                              "embedding file (.csv for CSV, otherwise binary)");
  auto* syn = cmd->add_flag("--synthetic", f.synthetic, "draw a fresh synthetic task per episode");
  emb->excludes(syn);
  cmd->add_option("--ways", f.bench.n_way, "classes per episode")->capture_default_str();
  cmd->add_option("--shots", f.bench.k_shot, "support examples per class")
      ->capture_default_str();
  cmd->add_option("--queries", f.bench.m_query, "query examples per class")
      ->capture_default_str();
  cmd->add_option("--episodes", f.bench.episodes, "number of episodes")->capture_default_str();
  cmd->add_option("--seed", f.bench.base_seed, "episode i uses seed + i")->capture_default_str();
  cmd->add_option("--methods", f.methods, "comma-separated subset of proto,imprint,lp,a2lp")
      ->capture_default_str();
  cmd->add_option("--jobs", f.bench.jobs, "concurrent episodes (output does not depend on it)")
      ->capture_default_str();
  cmd->add_option("--dim", f.spec.dim, "synthetic feature dimension")->capture_default_str();
  cmd->add_option("--sigma-b", f.spec.between_class_scale, "synthetic class-mean scale")
      ->capture_default_str();
  cmd->add_option("--sigma-w", f.spec.within_class_scale, "synthetic within-class scale")
      ->capture_default_str();
  cmd->add_option("--proto-metric", f.proto_metric, "euclidean or cosine")
      ->check(CLI::IsMember({"euclidean", "cosine"}))
      ->capture_default_str();
  cmd->add_option("--imprint-steps", f.bench.imprint.steps, "imprinting fine-tuning steps")
      ->capture_default_str();
  cmd->add_option("--imprint-lr", f.bench.imprint.learning_rate, "imprinting learning rate")
      ->capture_default_str();
  cmd->add_option("--imprint-scale", f.bench.imprint.scale, "imprinting logit scale")
      ->capture_default_str();
  cmd->add_option("--plc-scope", f.plc_scope, "PLC statistics per episode or over the file")
      ->check(CLI::IsMember({"episode", "global"}))
      ->capture_default_str();
  cmd->add_option("--output", f.output, "table, kv or both")
      ->check(CLI::IsMember({"table", "kv", "both"}))
      ->capture_default_str();
  cmd->add_flag("--timing", f.timing, "print wall time to stderr");
  f.algorithm.add_to(cmd);
}

int run_bench(BenchFlags& f, std::ostream& out, std::ostream& err) {
  if (f.embeddings.empty() && !f.synthetic) {
    err << "bench: one of --embeddings or --synthetic is required\n";
    return kExitError;
  }
  BenchmarkConfig config = f.bench;
  config.a2lp = f.algorithm.resolve();
  config.methods = parse_method_list(f.methods);
  config.proto_metric = parse_metric(f.proto_metric);
  config.plc_scope = parse_plc_scope(f.plc_scope);

  std::optional<EmbeddingSet> set;
  BenchmarkSource source = f.spec;
  std::vector<std::pair<std::string, std::string>> source_echo;
  if (!f.embeddings.empty()) {
    set = load_embeddings(f.embeddings, format_from_path(f.embeddings));
    source = std::cref(*set);
    source_echo = {{"source", "embeddings"}, {"embeddings", f.embeddings}};
  } else {
    source_echo = {{"source", "synthetic"},
                   {"dim", std::to_string(f.spec.dim)},
                   {"sigma_b", number(f.spec.between_class_scale)},
                   {"sigma_w", number(f.spec.within_class_scale)}};
  }

  const bool has_a2lp =
      std::ranges::find(config.methods, Method::kA2lp) != config.methods.end();
  if (has_a2lp && config.a2lp.steps > 200) {
    BenchmarkConfig probe = config;
    probe.methods = {Method::kA2lp};
    probe.episodes = 1;
    probe.jobs = 1;
    const auto seconds_for = [&](std::size_t steps) {
      probe.a2lp.steps = steps;
      const auto t0 = std::chrono::steady_clock::now();
      run_benchmark(source, probe);
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    const double base = seconds_for(0);
    const double per_step = std::max(0.0, seconds_for(10) - base) / 10.0;
    const double estimate = base + per_step * static_cast<double>(config.a2lp.steps);
    char note[160];
    std::snprintf(note, sizeof(note),
                  "note: steps=%zu; A2LP costs about %.2f s per episode on this machine\n",
                  config.a2lp.steps, estimate);
    err << note;
  }

  BenchmarkReport report = run_benchmark(source, config);
  report.config.insert(report.config.begin(), source_echo.begin(), source_echo.end());
  if (f.output == "table" || f.output == "both") out << format_table(report);
  if (f.output == "both") out << '\n';
  if (f.output == "kv" || f.output == "both") out << format_key_values(report);
  if (f.timing) err << "wall_time_seconds=" << number(report.wall_time_seconds) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- solve

struct SolveFlags {
  AlgorithmFlags algorithm;
  std::string embeddings;
  std::string support;
  std::string support_file;
  std::string query;
  std::string query_file;
  bool trace = false;
  std::string dump_graph;
};

void add_solve(CLI::App& app, SolveFlags& f) {
  CLI::App* cmd = app.add_subcommand("solve", "classify the queries of one task");
  cmd->add_option("--embeddings", f.embeddings, "embedding file")->required();
  auto* s = cmd->add_option("--support", f.support,
                            "comma-separated supports, each ROW or ROW:LABEL");
  auto* sf = cmd->add_option("--support-file", f.support_file, "supports, one entry per line");
  s->excludes(sf);
  auto* q = cmd->add_option("--query", f.query, "comma-separated query rows (default: all others)");
  auto* qf = cmd->add_option("--query-file", f.query_file, "query rows, one per line");
  q->excludes(qf);
  cmd->add_flag("--trace", f.trace, "per-step diagnostics on stderr");
  cmd->add_option("--dump-graph", f.dump_graph,
                  "write PREFIX.affinity.txt and PREFIX.normalized.txt for the initial graph");
  f.algorithm.add_to(cmd);
}

std::vector<std::string> split_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::string token;
  for (const char ch : text + ",") {
    if (ch == ',' || ch == '\n' || ch == ' ' || ch == '\t' || ch == '\r') {
      if (!token.empty()) tokens.push_back(token);
      token.clear();
    } else {
      token.push_back(ch);
    }
  }
  return tokens;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

template <typename T>
T parse_integer(const std::string& token, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error(ErrorCode::kParse, std::string("malformed ") + what + ": '" + token + "'");
  }
  return value;
}

int run_solve(const SolveFlags& f, std::ostream& out, std::ostream& err) {
  const A2lpConfig config = f.algorithm.resolve();
  const EmbeddingSet set = load_embeddings(f.embeddings, format_from_path(f.embeddings));

  const std::string support_text = f.support_file.empty() ? f.support : read_text(f.support_file);
  std::vector<Index> support_rows;
  std::vector<std::int64_t> support_original;
  for (const std::string& token : split_tokens(support_text)) {
    const auto colon = token.find(':');
    const auto row = parse_integer<Index>(token.substr(0, colon), "support row");
    std::int64_t label = 0;
    if (colon != std::string::npos) {
      label = parse_integer<std::int64_t>(token.substr(colon + 1), "support label");
    } else if (set.has_labels() && row < set.size()) {
      label = set.labels[row];
    } else {
      throw Error(ErrorCode::kInvalidArgument,
                  "support row " + std::to_string(row) + " has no label (use ROW:LABEL)");
    }
    support_rows.push_back(row);
    support_original.push_back(label);
  }
  if (support_rows.empty()) throw Error(ErrorCode::kInvalidArgument, "no supports given");

  std::vector<Index> query_rows;
  const std::string query_text = f.query_file.empty() ? f.query : read_text(f.query_file);
  for (const std::string& token : split_tokens(query_text)) {
    query_rows.push_back(parse_integer<Index>(token, "query row"));
  }
  if (f.query.empty() && f.query_file.empty()) {
    for (Index r = 0; r < set.size(); ++r)
      if (std::ranges::find(support_rows, r) == support_rows.end()) query_rows.push_back(r);
  }

  // Original class ids -> 0..N-1 in ascending order.
  std::vector<std::int64_t> classes = support_original;
  std::ranges::sort(classes);
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  std::map<std::int64_t, Index> remap;
  for (Index c = 0; c < classes.size(); ++c) remap[classes[c]] = c;

  Episode episode;
  episode.n_way = classes.size();
  episode.support_indices = support_rows;
  for (const std::int64_t label : support_original) episode.support_labels.push_back(remap[label]);
  episode.query_indices = query_rows;
  if (set.has_labels()) {
    bool all_known = true;
    std::vector<Index> truth;
    for (const Index r : query_rows) {
      const auto it = r < set.size() ? remap.find(set.labels[r]) : remap.end();
      if (it == remap.end()) {
        all_known = false;
        break;
      }
      truth.push_back(it->second);
    }
    if (all_known) episode.query_labels = std::move(truth);
  }
  validate(episode, set.size());

  const EmbeddingSet local =
      preprocess(gather_rows(set, episode.row_order()), config.preprocess);
  const Episode local_episode = episode.localized();

  if (!f.dump_graph.empty()) {
    const SparseMatrix affinity = build_affinity(local.vectors, config.graph);
    const PropagationGraph graph = normalize_graph(affinity);
    for (const auto& [suffix, matrix] :
         {std::pair{".affinity.txt", &affinity}, std::pair{".normalized.txt", &graph.normalized_adjacency}}) {
      std::ofstream dump(f.dump_graph + suffix);
      if (!dump) throw Error(ErrorCode::kIo, "cannot write " + f.dump_graph + suffix);
      write_coordinates(*matrix, dump);
    }
  }

  StepObserver observer;
  if (f.trace) {
    observer = [&err](const StepRecord& r) {
      err << "step=" << r.step << " loss=" << number(r.loss)
          << " displacement=" << number(r.displacement);
      if (r.query_accuracy) err << " query_accuracy=" << number(*r.query_accuracy);
      err << '\n';
    };
  }
  const A2lpResult result = run_a2lp(local.vectors, local_episode, config, observer);
  for (const Index p : result.predictions) out << classes[p] << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- gradcheck

struct GradcheckFlags {
  AlgorithmFlags algorithm;
  Index trials = 20;
  std::uint64_t seed = 1;
  Index min_rows = 15;
  Index max_rows = 40;
  Index min_dim = 4;
  Index max_dim = 16;
  Index ways = 5;
  Index shots = 1;
  double step = 1e-4;
  double tolerance = 1e-3;
};

void add_gradcheck(CLI::App& app, GradcheckFlags& f) {
  CLI::App* cmd = app.add_subcommand(
      "gradcheck", "compare analytic anchor gradients with central finite differences");
  cmd->add_option("--trials", f.trials, "random instances")->capture_default_str();
  cmd->add_option("--seed", f.seed, "instance i uses seed + i")->capture_default_str();
  cmd->add_option("--min-rows", f.min_rows, "smallest T")->capture_default_str();
  cmd->add_option("--max-rows", f.max_rows, "largest T")->capture_default_str();
  cmd->add_option("--min-dim", f.min_dim, "smallest d")->capture_default_str();
  cmd->add_option("--max-dim", f.max_dim, "largest d")->capture_default_str();
  cmd->add_option("--ways", f.ways, "classes")->capture_default_str();
  cmd->add_option("--shots", f.shots, "anchors per class")->capture_default_str();
  cmd->add_option("--fd-step", f.step, "finite-difference step")->capture_default_str();
  cmd->add_option("--tolerance", f.tolerance, "max relative error")->capture_default_str();
  f.algorithm.add_to(cmd);
}

// Minimum gap between a kNN-boundary similarity pair or a selected cosine
// and zero; finite differences are only meaningful away from these kinks.
double smoothness_margin(const Matrix& sim, const KnnMask& mask, Index k) {
  double margin = INFINITY;
  const Index n = sim.rows();
  for (Index j = 0; j < n; ++j) {
    std::vector<double> column;
    for (Index i = 0; i < n; ++i)
      if (i != j) column.push_back(sim(i, j));
    std::ranges::sort(column, std::greater<>());
    if (k < column.size()) margin = std::min(margin, column[k - 1] - column[k]);
  }
  for (Index i = 0; i < n; ++i)
    for (const Index j : mask.row(i)) margin = std::min(margin, std::abs(sim(i, j)));
  return margin;
}

int run_gradcheck(const GradcheckFlags& f, std::ostream& out) {
  if (f.trials == 0) throw Error(ErrorCode::kInvalidArgument, "--trials must be positive");
  if (f.min_rows > f.max_rows || f.min_dim > f.max_dim || f.min_dim == 0) {
    throw Error(ErrorCode::kInvalidArgument, "empty row or dimension range");
  }
  if (f.min_rows <= f.ways * f.shots) {
    throw Error(ErrorCode::kInvalidArgument, "--min-rows must exceed ways * shots");
  }
  const A2lpConfig base = f.algorithm.resolve();

  double worst = 0.0;
  std::vector<Index> failed;
  for (Index trial = 0; trial < f.trials; ++trial) {
    Rng rng(f.seed + trial);
    Matrix vectors;
    KnnMask mask;
    A2lpConfig config = base;
    Index rows = 0;
    for (Index attempt = 0;; ++attempt) {
      rows = f.min_rows + rng.uniform_index(f.max_rows - f.min_rows + 1);
      const Index dim = f.min_dim + rng.uniform_index(f.max_dim - f.min_dim + 1);
      vectors = Matrix(rows, dim);
      for (double& x : vectors.values()) x = rng.normal();
      vectors = l2_normalize(make_embedding_set(std::move(vectors))).vectors;
      config.graph.k = std::min(base.graph.k, rows - 1);
      const Matrix sim = cosine_matrix(vectors);
      mask = select_neighbours(sim, config.graph.k);
      if (smoothness_margin(sim, mask, config.graph.k) > 1e-6 || attempt == 100) break;
    }

    std::vector<Index> support_labels;
    for (Index c = 0; c < f.ways; ++c)
      for (Index s = 0; s < f.shots; ++s) support_labels.push_back(c);
    const LabelMatrix labels = build_label_matrix(support_labels, f.ways, rows);
    const AnchorGradient analytic = anchor_gradient(vectors, labels, config);

    double trial_worst = 0.0;
    for (Index i = 0; i < labels.support_count; ++i) {
      for (Index c = 0; c < vectors.cols(); ++c) {
        Matrix plus = vectors;
        Matrix minus = vectors;
        plus(i, c) += f.step;
        minus(i, c) -= f.step;
        const double numeric = (anchor_loss(plus, labels, config, &mask) -
                                anchor_loss(minus, labels, config, &mask)) /
                               (2.0 * f.step);
        const double a = analytic.gradient(i, c);
        const double scale = std::max({std::abs(a), std::abs(numeric), 1e-12});
        trial_worst = std::max(trial_worst, std::abs(a - numeric) / scale);
      }
    }
    out << "trial=" << trial << " T=" << rows << " d=" << vectors.cols()
        << " k=" << config.graph.k << " loss=" << number(analytic.loss)
        << " max_rel_err=" << number(trial_worst) << '\n';
    if (!(trial_worst <= f.tolerance)) failed.push_back(trial);
    worst = std::max(worst, std::isnan(trial_worst) ? INFINITY : trial_worst);
  }
  out << "max_rel_err=" << number(worst) << ", " << (failed.empty() ? "PASS" : "FAIL") << '\n';
  if (!failed.empty()) {
    out << "failed_trials=";
    for (Index i = 0; i < failed.size(); ++i) out << (i ? "," : "") << failed[i];
    out << '\n';
    return kExitVerificationFailed;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- synth

struct SynthFlags {
  SyntheticTaskSpec spec;
  std::string out_path;
};

void add_synth(CLI::App& app, SynthFlags& f) {
  CLI::App* cmd = app.add_subcommand("synth", "write one synthetic task as an embedding file");
  cmd->add_option("--out", f.out_path, "output path (.csv for CSV, otherwise binary)")
      ->required();
  cmd->add_option("--ways", f.spec.n_way, "classes")->capture_default_str();
  cmd->add_option("--shots", f.spec.k_shot, "support examples per class")->capture_default_str();
  cmd->add_option("--queries", f.spec.m_query, "query examples per class")->capture_default_str();
  cmd->add_option("--dim", f.spec.dim, "feature dimension")->capture_default_str();
  cmd->add_option("--sigma-b", f.spec.between_class_scale, "class-mean scale")
      ->capture_default_str();
  cmd->add_option("--sigma-w", f.spec.within_class_scale, "within-class scale")
      ->capture_default_str();
  cmd->add_option("--seed", f.spec.seed, "generator seed")->capture_default_str();
}

int run_synth(const SynthFlags& f, std::ostream& out) {
  const SyntheticTask task = generate_synthetic(f.spec);
  save_embeddings(task.set, f.out_path, format_from_path(f.out_path));
  out << "wrote " << task.set.size() << " x " << task.set.dim() << " to " << f.out_path << '\n';
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"a2lp: transductive few-shot inference by adaptive anchor label propagation"};
  app.name("a2lp");
  app.require_subcommand(1, 1);

  BenchFlags bench;
  SolveFlags solve;
  GradcheckFlags gradcheck;
  SynthFlags synth;
  add_bench(app, bench);
  add_solve(app, solve);
  add_gradcheck(app, gradcheck);
  add_synth(app, synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
  }

  try {
    if (app.got_subcommand("bench")) return run_bench(bench, out, err);
    if (app.got_subcommand("solve")) return run_solve(solve, out, err);
    if (app.got_subcommand("gradcheck")) return run_gradcheck(gradcheck, out);
    if (app.got_subcommand("synth")) return run_synth(synth, out);
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace a2lp::cli
