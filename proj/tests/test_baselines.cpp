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

#include <gtest/gtest.h>

#include <cmath>

#include "a2lp/adaptation.hpp"
#include "a2lp/baselines.hpp"
#include "a2lp/evaluation.hpp"
#include "test_util.hpp"

namespace a2lp {
namespace {

struct Fixture {
  EmbeddingSet set;
  Episode episode;
};

Fixture synthetic(std::uint64_t seed, Index shots = 1) {
  SyntheticTaskSpec spec;
  spec.k_shot = shots;
  spec.seed = seed;
  const SyntheticTask t = generate_synthetic(spec);
  return {l2_normalize(t.set), t.episode};
}

Fixture hand_episode(Matrix vectors, std::vector<Index> support_labels, Index n_way) {
  Fixture f{make_embedding_set(std::move(vectors)), {}};
  f.episode = testing::local_episode(f.set.size(), n_way, 1);
  f.episode.support_labels = std::move(support_labels);
  return f;
}

TEST(PrototypeTest, OneShotPrototypesAreSupports) {
  const Fixture f = synthetic(1);
  const PrototypeSet p = build_prototypes(f.set, f.episode, Metric::kEuclidean);
  for (Index i = 0; i < f.episode.support_count(); ++i) {
    for (Index c = 0; c < f.set.dim(); ++c)
      EXPECT_EQ(p.prototypes(f.episode.support_labels[i], c),
                f.set.vectors(f.episode.support_indices[i], c));
  }
  // A query that duplicates support vector 2 goes to its class.
  Fixture g = f;
  const Index q = g.episode.query_indices[0];
  for (Index c = 0; c < g.set.dim(); ++c)
    g.set.vectors(q, c) = g.set.vectors(g.episode.support_indices[2], c);
  EXPECT_EQ(prototypical_classify(g.set, g.episode)[0], g.episode.support_labels[2]);
}

TEST(PrototypeTest, GeometryExample) {
  const Fixture f = hand_episode(Matrix::from_rows({{1, 0}, {-1, 0}, {0.9, 0}}), {0, 1}, 2);
  EXPECT_EQ(prototypical_classify(f.set, f.episode), (std::vector<Index>{0}));
  EXPECT_EQ(prototypical_classify(f.set, f.episode, Metric::kCosine), (std::vector<Index>{0}));
}

TEST(PrototypeTest, MeanOfShots) {
  Fixture f = hand_episode(Matrix::from_rows({{0, 0}, {2, 2}, {9, 9}, {1, 1}}), {0, 0, 1}, 2);
  f.episode.support_indices = {0, 1, 2};
  f.episode.query_indices = {3};
  const PrototypeSet p = build_prototypes(f.set, f.episode, Metric::kEuclidean);
  EXPECT_EQ(p.prototypes, Matrix::from_rows({{1, 1}, {9, 9}}));
}

TEST(PrototypeTest, TiesGoToLowestClass) {
  const Fixture f = hand_episode(Matrix::from_rows({{1, 0}, {-1, 0}, {0, 1}}), {0, 1}, 2);
  EXPECT_EQ(prototypical_classify(f.set, f.episode), (std::vector<Index>{0}));
}

TEST(PrototypeTest, EuclideanEqualsCosineOnUnitVectors) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Fixture f = synthetic(seed, 1);
    EXPECT_EQ(prototypical_classify(f.set, f.episode, Metric::kEuclidean),
              prototypical_classify(f.set, f.episode, Metric::kCosine));
  }
}

TEST(ImprintTest, ZeroStepsEqualsCosinePrototypes) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (Index shots : {1u, 5u}) {
      const Fixture f = synthetic(seed, shots);
      EXPECT_EQ(imprint_and_finetune(f.set, f.episode, {0, 0.01, 10}),
                prototypical_classify(f.set, f.episode, Metric::kCosine));
    }
  }
}

TEST(ImprintTest, WeightsStartNormalized) {
  const Fixture f = synthetic(3, 5);
  const ImprintedClassifier w = imprint_and_finetune_weights(f.set, f.episode, {0, 0.01, 10});
  for (Index r = 0; r < w.weights.rows(); ++r) {
    double s = 0;
    for (double x : w.weights.row(r)) s += x * x;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(ImprintTest, SeparableSupportReachesFullAccuracy) {
  // The class 1 support sits between the class 0 supports in the plane and
  // is separated only through z, so imprinting misclassifies a support.
  Fixture f = hand_episode(
      Matrix::from_rows({{1, 0.05, 0}, {0.2, 1, 0}, {0.45, 0.9, 0.1}, {0.7, 0.7, 0}, {1, 1, 1}}),
      {0, 0, 1}, 2);
  f.episode.support_indices = {0, 1, 2};
  f.episode.query_indices = {3, 4};
  f.set = l2_normalize(f.set);
  const auto support_accuracy = [&](const ImprintedClassifier& w) {
    Index correct = 0;
    for (Index i = 0; i < 3; ++i) {
      const auto x = f.set.vectors.row(f.episode.support_indices[i]);
      double best = -INFINITY;
      Index arg = 0;
      for (Index c = 0; c < 2; ++c) {
        const double s = cosine_similarity(x, w.weights.row(c));
        if (s > best) best = s, arg = c;
      }
      correct += arg == f.episode.support_labels[i];
    }
    return correct / 3.0;
  };
  EXPECT_LT(support_accuracy(imprint_and_finetune_weights(f.set, f.episode, {0, 0.01, 10})), 1.0);
  EXPECT_EQ(support_accuracy(imprint_and_finetune_weights(f.set, f.episode, {1000, 0.01, 10})), 1.0);
}

TEST(ImprintTest, OneShotFineTuningRarelyChangesPredictions) {
  Index changed = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Fixture f = synthetic(seed);
    const auto a = imprint_and_finetune(f.set, f.episode, {0, 0.01, 10});
    const auto b = imprint_and_finetune(f.set, f.episode);
    for (Index i = 0; i < a.size(); ++i) changed += a[i] != b[i];
    total += a.size();
  }
  EXPECT_LT(static_cast<double>(changed) / total, 0.1) << changed << " of " << total;
}

TEST(LpTest, EqualsZeroStepA2lp) {
  A2lpConfig c;
  c.steps = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Fixture f = synthetic(seed);
    EXPECT_EQ(plain_lp_classify(f.set, f.episode, c), run_a2lp(f.set, f.episode, c).predictions);
  }
}

TEST(LpTest, AlphaZeroPredictsClassZero) {
  const Fixture f = synthetic(2);
  A2lpConfig c;
  c.alpha = 0;
  for (Index p : plain_lp_classify(f.set, f.episode, c)) EXPECT_EQ(p, 0u);
}

// Two interleaved half-circles lifted to z = 10, labelled at their far tips.
// Cosine ranking then follows planar distance, and each moon's kNN graph is
// closed, while the single prototypes sit far from the opposite ends.
Fixture two_moons(Index per_moon) {
  Matrix v(2 * per_moon, 3);
  for (Index i = 0; i < per_moon; ++i) {
    const double t = M_PI * i / (per_moon - 1);
    v(i, 0) = -std::cos(t);
    v(i, 1) = std::sin(t);
    v(i, 2) = 10;
    v(per_moon + i, 0) = 1 + std::cos(t);
    v(per_moon + i, 1) = 0.5 - std::sin(t);
    v(per_moon + i, 2) = 10;
  }
  Fixture f{make_embedding_set(v), {}};
  f.episode.n_way = 2;
  f.episode.support_indices = {0, per_moon};
  f.episode.support_labels = {0, 1};
  for (Index i = 1; i < per_moon; ++i) {
    f.episode.query_indices.push_back(i);
    f.episode.query_labels.push_back(0);
  }
  for (Index i = 1; i < per_moon; ++i) {
    f.episode.query_indices.push_back(per_moon + i);
    f.episode.query_labels.push_back(1);
  }
  return f;
}

TEST(LpTest, BeatsPrototypesOnTwoMoons) {
  const Fixture f = two_moons(40);
  A2lpConfig c;
  c.graph.k = 4;
  const double lp = score(plain_lp_classify(f.set, f.episode, c), f.episode.query_labels);
  const double proto = score(prototypical_classify(f.set, f.episode), f.episode.query_labels);
  EXPECT_EQ(lp, 1.0);
  EXPECT_LT(proto, 0.9);
  EXPECT_GT(lp, proto);
}

TEST(BaselineTest, InvariantToGlobalRescaling) {
  A2lpConfig c;
  c.steps = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Fixture f = synthetic(seed);
    Fixture g = f;
    for (double& x : g.set.vectors.values()) x *= 4.0;
    EXPECT_EQ(prototypical_classify(f.set, f.episode), prototypical_classify(g.set, g.episode));
    EXPECT_EQ(prototypical_classify(f.set, f.episode, Metric::kCosine),
              prototypical_classify(g.set, g.episode, Metric::kCosine));
    EXPECT_EQ(imprint_and_finetune(f.set, f.episode), imprint_and_finetune(g.set, g.episode));
    EXPECT_EQ(plain_lp_classify(f.set, f.episode, c), plain_lp_classify(g.set, g.episode, c));
  }
}

TEST(BaselineTest, Deterministic) {
  const Fixture f = synthetic(9, 5);
  EXPECT_EQ(imprint_and_finetune(f.set, f.episode), imprint_and_finetune(f.set, f.episode));
  EXPECT_EQ(parse_metric("cosine"), Metric::kCosine);
}

}  // namespace
}  // namespace a2lp
