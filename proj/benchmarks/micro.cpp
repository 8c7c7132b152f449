// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

// Micro benchmarks for the hot paths: retrieval, chain following and scoring.

#include <benchmark/benchmark.h>

#include "cbrikb/kbc.hpp"
#include "cbrikb/reason.hpp"
#include "cbrikb/retrieve.hpp"
#include "cbrikb/rng.hpp"
#include "cbrikb/synthetic.hpp"

namespace {

using namespace cbr;

CaseBase random_casebase(std::size_t n, int dim) {
  SplitMix64 rng(42);
  CaseBase cb(dim);
  for (std::size_t i = 0; i < n; ++i) {
    Case c;
    c.case_id = "c" + std::to_string(i);
    c.embedding.values.resize(static_cast<std::size_t>(dim));
    for (auto& v : c.embedding.values) v = static_cast<float>(rng.uniform(-1, 1));
    normalize(c.embedding);
    cb.add(std::move(c));
  }
  return cb;
}

void BM_Knn(benchmark::State& state) {
  const int dim = 256;
  const CaseBase cb = random_casebase(static_cast<std::size_t>(state.range(0)), dim);
  const EmbeddingVector query = cb.at(0).embedding;
  RetrievalConfig cfg;
  cfg.k = 5;
  for (auto _ : state) benchmark::DoNotOptimize(knn(cb, query, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Knn)->Arg(1000)->Arg(10000);

void BM_FollowChain(benchmark::State& state) {
  const auto bench = make_movie_benchmark();
  const KnowledgeGraph kg = bench.graph();
  BeamConfig cfg;
  cfg.use_kbc = false;
  cfg.use_text = false;
  const Reasoner reasoner(kg, cfg, {});
  const auto chain = InferentialChain::parse("directed_by,directed_by^-1,starred_actors");
  const EntityId source = kg.entity(bench.hops[2].test.front().query_entities().front());
  for (auto _ : state) benchmark::DoNotOptimize(reasoner.follow_chain(kg, std::span(&source, 1), chain));
}
BENCHMARK(BM_FollowChain);

void BM_ComplexScore(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  ComplExModel m(dim, {"a", "b"}, {"r"});
  SplitMix64 rng(1);
  for (auto* block : {&m.entity_re, &m.entity_im, &m.relation_re, &m.relation_im}) {
    for (double& v : *block) v = rng.uniform(-1, 1);
  }
  for (auto _ : state) benchmark::DoNotOptimize(m.score(0, 0, 1));
}
BENCHMARK(BM_ComplexScore)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
