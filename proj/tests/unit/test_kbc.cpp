// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include <gtest/gtest.h>

#include <cmath>

#include "cbrikb/kbc.hpp"
#include "cbrikb/rng.hpp"
#include "error_kind.hpp"
#include "oracles.hpp"

namespace cbr {
namespace {

using testing::kind_of;

ComplExModel random_model(int dim, std::size_t n_entities, std::size_t n_relations, std::uint64_t seed) {
  std::vector<std::string> e, r;
  for (std::size_t i = 0; i < n_entities; ++i) e.push_back("e" + std::to_string(i));
  for (std::size_t i = 0; i < n_relations; ++i) r.push_back("r" + std::to_string(i));
  ComplExModel m(dim, e, r);
  SplitMix64 rng(seed);
  for (auto* block : {&m.entity_re, &m.entity_im, &m.relation_re, &m.relation_im}) {
    for (double& v : *block) v = rng.uniform(-1, 1);
  }
  m.scale = rng.uniform(0.5, 2);
  m.bias = rng.uniform(-1, 1);
  return m;
}

TEST(ComplexScore, RealOnesGiveDimension) {
  ComplExModel m(2, {"a", "b"}, {"r"});
  std::fill(m.entity_re.begin(), m.entity_re.end(), 1.0);
  std::fill(m.relation_re.begin(), m.relation_re.end(), 1.0);
  EXPECT_DOUBLE_EQ(complex_score(m, "a", "r", "b"), 2.0);
  EXPECT_DOUBLE_EQ(kbc_prob(m, "a", "r", "b"), 1.0 / (1.0 + std::exp(-2.0)));
  ComplExModel zero(3, {"a"}, {"r"});
  EXPECT_DOUBLE_EQ(kbc_prob(zero, "a", "r", "a"), 0.5);
  EXPECT_EQ(kind_of([&] { complex_score(m, "a", "r", "zz"); }), ErrorKind::kNotFound);
  EXPECT_EQ(kind_of([&] { complex_score(m, "a", "q", "b"); }), ErrorKind::kNotFound);
}

TEST(ComplexScore, RealRelationIsSymmetric) {
  auto m = random_model(6, 5, 2, 4);
  std::fill(m.relation_im.begin(), m.relation_im.end(), 0.0);
  for (int s = 0; s < 5; ++s)
    for (int o = 0; o < 5; ++o)
      EXPECT_NEAR(m.score(s, 0, o), m.score(o, 0, s), 1e-12);
}

TEST(ComplexScore, MatchesComplexArithmeticOracle) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto m = random_model(7, 6, 3, seed);
    for (std::uint32_t s = 0; s < 6; ++s)
      for (std::uint32_t r = 0; r < 3; ++r)
        for (std::uint32_t o = 0; o < 6; ++o)
          EXPECT_NEAR(m.score(s, r, o), static_cast<double>(testing::oracle_complex(m, s, r, o)), 1e-9);
  }
}

TEST(Probability, MonotoneInScore) {
  const auto m = random_model(2, 1, 1, 3);
  double prev = -1.0;
  for (double x = -10; x <= 10; x += 0.5) {
    const double p = m.probability(x);
    EXPECT_GT(p, prev);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
    prev = p;
  }
}

TEST(Training, SeparatesTrueTripleAndReplays) {
  KnowledgeGraph kg;
  kg.add_triple("a", "r", "b");
  kg.add_triple("c", "s", "d");
  KbcTrainConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 100;
  cfg.calibration_fraction = 0.0;
  KbcTrainReport report;
  const auto m = train_complex(kg, cfg, &report);
  EXPECT_EQ(report.training_triples, 2u);
  EXPECT_EQ(report.epoch_loss.size(), 100u);
  EXPECT_LT(report.epoch_loss.back(), report.epoch_loss.front());
  const double truth = complex_score(m, "a", "r", "b");
  for (const char* o : {"a", "c", "d"}) EXPECT_GT(truth, complex_score(m, "a", "r", o)) << o;
  EXPECT_EQ(train_complex(kg, cfg), m);
}

TEST(Training, NoSymbolicTriplesIsTrainingError) {
  KnowledgeGraph kg;
  kg.intern_entity("lonely");
  EXPECT_EQ(kind_of([&] { train_complex(kg, KbcTrainConfig{}); }), ErrorKind::kTraining);
}

TEST(Predict, ThresholdAndOrdering) {
  const auto m = random_model(4, 9, 1, 12);
  EXPECT_TRUE(predict_objects(m, "e0", "r0", 5, 1.0).empty());
  const auto all = predict_objects(m, "e0", "r0", 9, 0.0);
  ASSERT_EQ(all.size(), 9u);
  for (std::size_t i = 1; i < all.size(); ++i) EXPECT_GE(all[i - 1].second, all[i].second);
  // Full sort agrees with direct probabilities.
  for (const auto& [name, p] : all) EXPECT_DOUBLE_EQ(p, kbc_prob(m, "e0", "r0", name));
  const auto top3 = predict_subjects(m, "e1", "r0", 3, 0.0);
  ASSERT_EQ(top3.size(), 3u);
  const auto every = predict_subjects(m, "e1", "r0", 9, 0.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(top3[i], every[i]);
}

TEST(Evaluate, AllZeroModelRanksOptimistically) {
  ComplExModel zero(4, {"a", "b", "c"}, {"r"});
  KnowledgeGraph kg;
  kg.add_triple("a", "r", "b");
  kg.intern_entity("c");
  const std::vector<NamedTriple> held{{"a", "r", "c"}};
  const auto metrics = evaluate_kbc(zero, held, kg);
  EXPECT_DOUBLE_EQ(metrics.mrr, 1.0);
  EXPECT_DOUBLE_EQ(metrics.hits_at_1, 1.0);
  EXPECT_EQ(metrics.queries, 2u);
}

TEST(Cbrk, RoundTripAtFloatPrecision) {
  const auto m = random_model(5, 4, 2, 9);
  const auto loaded = decode_model(encode_model(m));
  EXPECT_EQ(loaded.entity_names(), m.entity_names());
  EXPECT_EQ(loaded.relation_names(), m.relation_names());
  EXPECT_DOUBLE_EQ(loaded.scale, m.scale);
  EXPECT_DOUBLE_EQ(loaded.bias, m.bias);
  for (std::size_t i = 0; i < m.entity_re.size(); ++i) EXPECT_NEAR(loaded.entity_re[i], m.entity_re[i], 1e-6);
  EXPECT_EQ(encode_model(loaded), encode_model(m));
  auto bytes = encode_model(m);
  EXPECT_EQ(kind_of([&] { decode_model(bytes.substr(0, bytes.size() - 1)); }), ErrorKind::kFormat);
  bytes[0] = 'X';
  EXPECT_EQ(kind_of([&] { decode_model(bytes); }), ErrorKind::kFormat);
}

TEST(Platt, RecoversSeparatingDirection) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 50; ++i) {
    scores.push_back(2.0 + 0.01 * i);
    labels.push_back(1);
    scores.push_back(-2.0 - 0.01 * i);
    labels.push_back(0);
  }
  const auto [a, b] = fit_platt(scores, labels);
  EXPECT_GT(a, 0.0);
  EXPECT_TRUE(std::isfinite(a) && std::isfinite(b));
  EXPECT_GT(1.0 / (1.0 + std::exp(-(a * 2.0 + b))), 0.9);
  EXPECT_LT(1.0 / (1.0 + std::exp(-(a * -2.0 + b))), 0.1);
  EXPECT_EQ(kind_of([] { fit_platt(std::vector<double>{}, std::vector<int>{}); }), ErrorKind::kContract);
}

TEST(Platt, StaysBoundedOnWideMarginData) {
  // One positive to four negatives, widely separated: the smoothed optimum is finite.
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    scores.push_back(8.0 + 0.1 * i);
    labels.push_back(1);
    for (int j = 0; j < 4; ++j) {
      scores.push_back(-12.0 - 0.1 * (4 * i + j));
      labels.push_back(0);
    }
  }
  const auto [a, b] = fit_platt(scores, labels);
  EXPECT_GT(a, 0.0);
  EXPECT_LT(a, 10.0);
  EXPECT_LT(std::abs(b), 50.0);
}

}  // namespace
}  // namespace cbr
