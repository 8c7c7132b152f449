// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include <gtest/gtest.h>

#include "cbrikb/revise.hpp"
#include "error_kind.hpp"

namespace cbr {
namespace {

using testing::kind_of;
using Names = std::vector<std::string>;

TEST(F1, ClosedForm) {
  EXPECT_DOUBLE_EQ(f1(Names{"a", "b"}, Names{"a"}), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(f1(Names{}, Names{"a"}), 0.0);
  EXPECT_DOUBLE_EQ(f1(Names{"x"}, Names{"a"}), 0.0);
  EXPECT_DOUBLE_EQ(f1(Names{"a", "b"}, Names{"b", "a"}), 1.0);
  EXPECT_EQ(kind_of([] { f1(Names{"a"}, Names{}); }), ErrorKind::kContract);
}

// q -r-> {A, B, C}; q -s-> A.
KnowledgeGraph fan_graph() {
  KnowledgeGraph kg;
  for (const char* t : {"A", "B", "C"}) kg.add_triple("q", "r", t);
  kg.add_triple("q", "s", "A");
  return kg;
}

Case owner(const Embedder& embedder, const KnowledgeGraph& kg) {
  return build_case("c1", "which one is [q]", Names{"A"}, kg, embedder);
}

TEST(LocalF1, ExecutesChainLiterally) {
  const auto kg = fan_graph();
  const HashEmbedder embedder(32, 1);
  const Case c = owner(embedder, kg);
  EXPECT_EQ(execute_names(kg, c.query_entities, InferentialChain::parse("r")), (Names{"A", "B", "C"}));
  EXPECT_DOUBLE_EQ(local_f1(InferentialChain::parse("r"), c, kg), 0.5);
  EXPECT_DOUBLE_EQ(local_f1(InferentialChain::parse("s"), c, kg), 1.0);
  EXPECT_DOUBLE_EQ(local_f1(InferentialChain::parse("missing"), c, kg), 0.0);
}

TEST(GlobalF1, EqualsLocalOnSelfDevSet) {
  const auto kg = fan_graph();
  const HashEmbedder embedder(32, 1);
  const Case c = owner(embedder, kg);
  const std::vector<QaExample> dev_examples{{"1", "which one is [q]", {"A"}, std::nullopt}};
  const DevSet dev = make_dev_set(dev_examples, embedder);
  for (const char* chain : {"r", "s"}) {
    const auto p = InferentialChain::parse(chain);
    EXPECT_DOUBLE_EQ(global_f1(p, c, dev, kg, 1), local_f1(p, c, kg)) << chain;
  }
  EXPECT_DOUBLE_EQ(global_f1(InferentialChain::parse("r"), c, DevSet{CaseBase(32)}, kg, 3), 0.0);
}

TEST(Revise, ThresholdRanksAndDiscards) {
  const auto kg = fan_graph();
  const HashEmbedder embedder(32, 1);
  CaseBase cb;
  Case c = owner(embedder, kg);
  c.chains = {InferentialChain::parse("r"), InferentialChain::parse("s"), InferentialChain::parse("zzz")};
  cb.add(c);
  ReviseConfig cfg;
  cfg.discard_threshold = 0.6;
  const auto res = revise_and_retain(cb, DevSet{CaseBase(32)}, kg, cfg);
  ASSERT_EQ(res.casebase.size(), 1u);
  const Case& kept = res.casebase.at(0);
  ASSERT_EQ(kept.chains.size(), 1u);
  EXPECT_EQ(kept.chains[0].to_string(), "s");
  ASSERT_TRUE(kept.chain_scores.has_value());
  EXPECT_DOUBLE_EQ((*kept.chain_scores)[0].local_f1, 1.0);
  EXPECT_EQ(res.report.chains_before, 3u);
  EXPECT_EQ(res.report.chains_discarded, 2u);
  ASSERT_EQ(res.report.verdicts.size(), 3u);
  EXPECT_EQ(res.report.verdicts[1].chain.to_string(), "r");
  EXPECT_NE(res.report.to_text().find("c1\tr\t0.500000\t0.000000\tdrop"), std::string::npos)
      << res.report.to_text();

  cfg.discard_threshold = 0.4;
  cfg.max_chains_per_case = 1;
  EXPECT_EQ(revise_and_retain(cb, DevSet{CaseBase(32)}, kg, cfg).casebase.at(0).chains.size(), 1u);

  cfg.discard_threshold = 1.0;
  cfg.threshold_on = ThresholdOn::kGlobal;
  const auto none = revise_and_retain(cb, DevSet{CaseBase(32)}, kg, cfg);
  EXPECT_TRUE(none.casebase.empty());
  EXPECT_EQ(none.report.cases_discarded, 1u);
}

TEST(Revise, ChainlessCasesPassThroughAndIdempotent) {
  const auto kg = fan_graph();
  const HashEmbedder embedder(32, 1);
  CaseBase cb;
  Case bare = owner(embedder, kg);
  bare.case_id = "bare";
  bare.chains.clear();
  cb.add(bare);
  cb.add(owner(embedder, kg));
  const auto once = revise_and_retain(cb, DevSet{CaseBase(32)}, kg);
  ASSERT_NE(once.casebase.find("bare"), nullptr);
  EXPECT_TRUE(once.casebase.find("bare")->chainless());
  const auto twice = revise_and_retain(once.casebase, DevSet{CaseBase(32)}, kg);
  EXPECT_EQ(twice.casebase, once.casebase);
  ReviseConfig bad;
  bad.discard_threshold = 2.0;
  EXPECT_EQ(kind_of([&] { revise_and_retain(cb, DevSet{CaseBase(32)}, kg, bad); }), ErrorKind::kContract);
}

}  // namespace
}  // namespace cbr
