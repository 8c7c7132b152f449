// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cbrikb/kbc.hpp"
#include "cbrikb/kg.hpp"
#include "cbrikb/qa.hpp"

namespace cbr {

/// Generator settings for the movie-domain benchmark.
struct SyntheticConfig {
  std::uint64_t seed = 7;
  int movies = 80;
  int directors = 25;
  int writers = 25;
  int actors = 60;
  int years = 25;
  int languages = 8;
  int genres = 10;
  int tags = 30;
  int ratings = 16;
  int actors_per_movie = 2;
  int train_per_hop = 200;
  int dev_per_hop = 50;
  int test_per_hop = 100;
};

struct QaSplits {
  std::vector<QaExample> train, dev, test;
};

struct SyntheticBenchmark {
  std::vector<NamedTriple> triples;
  std::vector<std::string> relations;
  std::array<QaSplits, 3> hops;  // 1-, 2- and 3-hop questions
  std::string proxy_texts;       // relation<TAB>text lines

  KnowledgeGraph graph() const;
};

/// Templated 1/2/3-hop questions over a generated movie KB. Every question
/// carries its gold chain; answers are the chain's execution minus the
/// topic entity. Templates are spread evenly over the splits.
SyntheticBenchmark make_movie_benchmark(const SyntheticConfig& config = {});

/// Proxy sentences for the eight movie relations.
std::string movie_proxy_texts();

/// One paraphrased sentence per fact, mentioning the subject first.
/// Document ids are `<prefix><index>`. Throws kValidation for relations
/// outside the movie schema.
std::vector<Document> support_documents(std::span<const NamedTriple> facts, std::string_view prefix);

/// Writes kb.tsv, proxies.tsv and <hop>hop_{train,dev,test}.tsv.
void write_benchmark(const SyntheticBenchmark& bench, const std::filesystem::path& dir);

/// Link-prediction benchmark: permutation, inverse and symmetric relations
/// over `entities` nodes with a held-out fraction.
struct KbcBenchmark {
  KnowledgeGraph train;
  std::vector<NamedTriple> held_out;
};

KbcBenchmark make_kbc_benchmark(std::uint64_t seed, int entities = 100, double held_out_fraction = 0.1);

}  // namespace cbr
