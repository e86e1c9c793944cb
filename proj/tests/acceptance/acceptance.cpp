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

// One line per acceptance criterion. Exit status is nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "a2lp/adaptation.hpp"
#include "a2lp/baselines.hpp"
#include "a2lp/evaluation.hpp"
#include "a2lp/graph.hpp"
#include "a2lp/propagation.hpp"
#include "a2lp/rng.hpp"
#include "cli.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace a2lp {
namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char b[64];
  std::snprintf(b, sizeof(b), f, a);
  return b;
}

// Gap of the nearest kink: a k-th / (k+1)-th similarity pair within a
// column, or a selected similarity at 0.
double smoothness_margin(const oracle::Dense& sim, std::size_t k) {
  double margin = INFINITY;
  for (std::size_t j = 0; j < sim.size(); ++j) {
    std::vector<double> col;
    for (std::size_t i = 0; i < sim.size(); ++i)
      if (i != j) col.push_back(sim[i][j]);
    std::sort(col.rbegin(), col.rend());
    if (k < col.size()) margin = std::min(margin, col[k - 1] - col[k]);
    for (std::size_t r = 0; r < k; ++r) margin = std::min(margin, std::abs(col[r]));
  }
  return margin;
}

Verdict gradient_correctness() {
  const auto t0 = Clock::now();
  constexpr Index kInstances = 20;
  constexpr double kStep = 1e-4;
  double worst = 0.0;
  Index checked = 0;
  Rng rng(2024);
  while (checked < kInstances) {
    const Index t = 15 + rng.uniform_index(26);
    const Index d = 4 + rng.uniform_index(13);
    const Matrix v = testing::random_unit_rows(t, d, rng.next());
    A2lpConfig c;
    c.steps = 0;
    c.graph.k = std::min<Index>(c.graph.k, t - 1);
    oracle::Dense dv = testing::to_dense(v);
    const oracle::Dense sim = oracle::cosines(dv);
    if (smoothness_margin(sim, c.graph.k) <= 1e-6) continue;
    const auto mask = oracle::knn_mask(sim, c.graph.k);
    const std::vector<Index> labels = {0, 1, 2, 3, 4};
    const oracle::Params p{c.graph.k, c.graph.gamma, c.alpha, c.tau};
    const Matrix g = anchor_gradient(v, build_label_matrix(labels, 5, t), c).gradient;
    for (Index i = 0; i < 5; ++i) {
      for (Index j = 0; j < d; ++j) {
        const double keep = dv[i][j];
        dv[i][j] = keep + kStep;
        const double up = oracle::loss(dv, labels, 5, p, mask);
        dv[i][j] = keep - kStep;
        const double down = oracle::loss(dv, labels, 5, p, mask);
        dv[i][j] = keep;
        const double fd = (up - down) / (2 * kStep);
        const double rel =
            std::abs(fd - g(i, j)) / std::max({std::abs(fd), std::abs(g(i, j)), 1e-12});
        worst = std::max(worst, std::isnan(rel) ? INFINITY : rel);
      }
    }
    ++checked;
  }
  const double elapsed = seconds_since(t0);
  return {worst <= 1e-3 && elapsed < 60.0,
          std::to_string(checked) + " instances, max_rel_err=" + fmt("%.3e", worst) + ", " +
              fmt("%.2f", elapsed) + " s"};
}

Verdict lp_fixed_point() {
  const auto t0 = Clock::now();
  double residual = 0.0, gap = 0.0;
  for (std::uint64_t e = 0; e < 100; ++e) {
    SyntheticTaskSpec spec;
    spec.seed = 5000 + e;
    spec.k_shot = 1 + e % 5;
    const SyntheticTask task = generate_synthetic(spec);
    const Matrix v = l2_normalize(task.set).vectors;
    const PropagationGraph g = build_graph(v, {});
    const LabelMatrix y = build_label_matrix(task.episode);
    const SimilarityMatrix z = propagate(g, y, 0.8);
    residual = std::max(residual, propagation_residual(g, z.values, y.values, 0.8));
    const IterativePropagation it = propagate_iterative(g, y, 0.8, 100000, 1e-10);
    gap = std::max(gap, max_abs_diff(z.values, it.z.values));
  }
  return {residual <= 1e-8 && gap <= 1e-6,
          "100 episodes, max residual=" + fmt("%.3e", residual) + ", max |closed-iterative|=" +
              fmt("%.3e", gap) + ", " + fmt("%.2f", seconds_since(t0)) + " s"};
}

Verdict degeneracies() {
  Index lp_mismatch = 0, imprint_mismatch = 0, alpha_mismatch = 0;
  for (std::uint64_t e = 0; e < 50; ++e) {
    SyntheticTaskSpec spec;
    spec.seed = 7000 + e;
    spec.k_shot = e % 2 ? 5 : 1;
    const SyntheticTask task = generate_synthetic(spec);
    const EmbeddingSet unit = l2_normalize(task.set);
    A2lpConfig c;
    c.steps = 0;
    const A2lpResult a = run_a2lp(unit, task.episode, c);
    const SimilarityMatrix z =
        propagate(build_graph(unit.vectors, c.graph), build_label_matrix(task.episode), c.alpha);
    if (a.predictions != plain_lp_classify(unit, task.episode, c) || a.z.values != z.values)
      ++lp_mismatch;
    if (imprint_and_finetune(unit, task.episode, {0, 0.01, 10}) !=
        prototypical_classify(unit, task.episode, Metric::kCosine))
      ++imprint_mismatch;
    const LabelMatrix y = build_label_matrix(task.episode);
    if (propagate(build_graph(unit.vectors, c.graph), y, 0.0).values != y.values) ++alpha_mismatch;
  }
  return {lp_mismatch + imprint_mismatch + alpha_mismatch == 0,
          "50 episodes; mismatches: steps=0 vs LP " + std::to_string(lp_mismatch) +
              ", imprint(0) vs proto(cosine) " + std::to_string(imprint_mismatch) +
              ", alpha=0 vs Y " + std::to_string(alpha_mismatch)};
}

Verdict knn_oracle() {
  Rng rng(99);
  Index pattern_mismatch = 0;
  double value_gap = 0.0;
  for (Index s = 0; s < 50; ++s) {
    const Index t = 2 + rng.uniform_index(99);
    const Index d = 1 + rng.uniform_index(32);
    const Index k = 1 + rng.uniform_index(std::min<Index>(20, t - 1));
    Matrix v = testing::random_matrix(t, d, rng.next());
    if (s % 5 == 0) {  // duplicated rows force exact ties
      for (Index r = 1; r < t; r += 3)
        for (Index c = 0; c < d; ++c) v(r, c) = v(r - 1, c);
    }
    const SparseMatrix a = build_affinity(v, {k, 3.0});
    const oracle::Dense sim = oracle::cosines(testing::to_dense(v));
    const auto mask = oracle::knn_mask(sim, k);
    const oracle::Dense ref = oracle::affinity(sim, mask, 3.0);
    bool same = true;
    for (Index i = 0; i < t; ++i) {
      for (Index j = 0; j < t; ++j) {
        same = same && (a.pattern().contains(i, j) == (mask[i][j] != 0));
        value_gap = std::max(value_gap, std::abs(a.at(i, j) - ref[i][j]));
      }
    }
    pattern_mismatch += !same;
  }
  return {pattern_mismatch == 0 && value_gap <= 1e-12,
          "50 sets, pattern mismatches=" + std::to_string(pattern_mismatch) +
              ", max value gap=" + fmt("%.3e", value_gap)};
}

Verdict synthetic_improvement() {
  const auto t0 = Clock::now();
  BenchmarkConfig c;
  c.methods = {Method::kLp, Method::kA2lp};
  c.episodes = 500;
  c.a2lp.steps = 100;
  c.jobs = std::max(1u, std::thread::hardware_concurrency());
  const SyntheticTaskSpec spec;  // d = 64, sigma_b = 1, sigma_w = 2.2
  const BenchmarkReport r = run_benchmark(spec, c);
  const MethodSummary& lp = r.methods[0];
  const MethodSummary& a2 = r.methods[1];
  const bool calibrated = lp.accuracy.mean >= 60.0 && lp.accuracy.mean <= 85.0;
  const bool pass = calibrated && a2.accuracy.mean >= lp.accuracy.mean &&
                    *a2.mean_final_loss < *a2.mean_initial_loss;
  std::ostringstream d;
  d << "sigma_w=" << spec.within_class_scale << ", 500 episodes, LP " << fmt("%.2f", lp.accuracy.mean)
    << " vs A2LP " << fmt("%.2f", a2.accuracy.mean) << ", loss " << fmt("%.4e", *a2.mean_initial_loss)
    << " -> " << fmt("%.4e", *a2.mean_final_loss) << ", jobs=" << c.jobs << ", "
    << fmt("%.1f", seconds_since(t0)) << " s";
  return {pass, d.str()};
}

Verdict determinism_under_parallelism() {
  const auto bench = [](const char* jobs) {
    const std::vector<const char*> argv = {"a2lp", "bench", "--synthetic", "--episodes", "24",
                                           "--seed", "3", "--steps", "20", "--jobs", jobs};
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return std::pair{code, out.str()};
  };
  const auto one = bench("1");
  const auto eight = bench("8");
  const bool pass = one.first == 0 && eight.first == 0 && one.second == eight.second &&
                    !one.second.empty();
  return {pass, "bench --jobs 1 vs --jobs 8: " + std::to_string(one.second.size()) + " vs " +
                    std::to_string(eight.second.size()) + " bytes, " +
                    (one.second == eight.second ? "identical" : "different")};
}

}  // namespace
}  // namespace a2lp

int main() {
  const std::vector<std::pair<const char*, std::function<a2lp::Verdict()>>> criteria = {
      {"gradient correctness", a2lp::gradient_correctness},
      {"LP fixed point", a2lp::lp_fixed_point},
      {"degeneracy equivalences", a2lp::degeneracies},
      {"brute-force kNN oracle", a2lp::knn_oracle},
      {"synthetic improvement", a2lp::synthetic_improvement},
      {"determinism under parallelism", a2lp::determinism_under_parallelism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    a2lp::Verdict v{false, ""};
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
    failures += !v.pass;
  }
  return failures == 0 ? 0 : 1;
}
