// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include <gtest/gtest.h>

#include "cbrikb/drop.hpp"
#include "cbrikb/evaluate.hpp"
#include "cbrikb/experiment.hpp"
#include "error_kind.hpp"

namespace cbr {
namespace {

using testing::kind_of;

TEST(ParseQa, FieldsIdsAndRoundTrip) {
  const auto ex = parse_qa("who directed [Heat]\tMann\n\nwho starred in [Heat]\tPacino|De Niro\tstarred_actors\n");
  ASSERT_EQ(ex.size(), 2u);
  EXPECT_EQ(ex[0].id, format_example_id(1));
  EXPECT_EQ(ex[1].id, format_example_id(3));
  EXPECT_EQ(ex[1].answers, (std::vector<std::string>{"Pacino", "De Niro"}));
  ASSERT_TRUE(ex[1].gold_chain.has_value());
  EXPECT_EQ(ex[1].gold_chain->to_string(), "starred_actors");
  EXPECT_EQ(ex[0].query_entities(), std::vector<std::string>{"Heat"});
  const auto again = parse_qa(serialize_qa(ex));
  EXPECT_EQ(again[1].answers, ex[1].answers);
  EXPECT_EQ(serialize_qa(again), serialize_qa(ex));
}

TEST(ParseQa, Errors) {
  for (const char* bad : {"no tab\n", "[x]\t\n", "who [x\tA\n", "plain question\tA\n", "[x]\tA||B\n"}) {
    EXPECT_EQ(kind_of([&] { parse_qa(bad); }), ErrorKind::kParse) << bad;
  }
}

KnowledgeGraph small_kb() {
  KnowledgeGraph kg;
  kg.add_triple("q", "r", "A");
  kg.add_triple("A", "s", "B");
  kg.add_triple("x", "r", "y");
  kg.add_triple("far", "t", "away");
  return kg;
}

TEST(Drop, PerQuestionExtremes) {
  const auto kg = small_kb();
  const auto ex = parse_qa("what is [q]\tA\tr\nno chain [q]\tA\n");
  const auto none = drop_per_question(kg, ex, 0.0, 3);
  EXPECT_TRUE(none.plan.dropped.empty());
  EXPECT_TRUE(none.plan.affected.empty());
  EXPECT_EQ(none.plan.skipped, 1u);
  const auto all = drop_per_question(kg, ex, 1.0, 3);
  // Every r-triple within two hops of q goes; y is not within reach.
  ASSERT_EQ(all.plan.dropped.size(), 1u);
  EXPECT_EQ(all.plan.dropped[0], (NamedTriple{"q", "r", "A"}));
  EXPECT_EQ(all.plan.affected, std::vector<std::string>{ex[0].id});
  EXPECT_EQ(all.reduced.triple_count(), kg.triple_count() - 1);
  EXPECT_EQ(apply_plan(kg, all.plan).triples(), all.reduced.triples());
}

TEST(Drop, GlobalPartitionsTriples) {
  const auto kg = small_kb();
  for (double f : {0.25, 0.5, 0.75}) {
    const auto r = drop_global(kg, f, 11);
    EXPECT_EQ(r.reduced.triple_count() + r.plan.dropped.size(), kg.triple_count()) << f;
    for (const auto& t : r.plan.dropped) {
      EXPECT_FALSE(r.reduced.find_entity(t.subject) && r.reduced.find_entity(t.object) &&
                   r.reduced.contains(Triple{r.reduced.entity(t.subject),
                                             {RelationKind::kSymbolic, *r.reduced.find_relation(t.relation)},
                                             r.reduced.entity(t.object)}));
    }
  }
  EXPECT_EQ(drop_global(kg, 0.5, 11).plan, drop_global(kg, 0.5, 11).plan);
  EXPECT_EQ(kind_of([&] { drop_global(kg, 0.0, 11); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([&] { drop_global(kg, 1.0, 11); }), ErrorKind::kConfig);
}

TEST(Drop, PlanTextRoundTrip) {
  const auto kg = small_kb();
  const auto ex = parse_qa("what is [q]\tA\tr\n");
  const auto plan = drop_per_question(kg, ex, 1.0, 5).plan;
  const auto text = plan.to_text();
  EXPECT_EQ(DropPlan::parse(text), plan);
  EXPECT_EQ(DropPlan::parse(text).to_text(), text);
  EXPECT_EQ(kind_of([] { DropPlan::parse("scheme\tglobal\n"); }), ErrorKind::kParse);
}

TEST(HitsAt1, CountsAndAbstention) {
  std::vector<QaExample> ex;
  std::vector<Prediction> pred;
  for (int i = 0; i < 1000; ++i) {
    ex.push_back({format_example_id(i + 1), "q [x]", {"gold"}, std::nullopt});
    Prediction p{ex.back().id, {}, {}};
    if (i < 783) p.ranking = {"gold", "other"};
    else if (i < 900) p.ranking = {"other", "gold"};
    pred.push_back(p);
  }
  const auto report = hits_at_1(pred, ex);
  EXPECT_DOUBLE_EQ(report.hits_at_1, 0.783);
  std::size_t abstained = 0;
  for (const auto& r : report.records) abstained += r.abstained;
  EXPECT_EQ(abstained, 100u);
  EXPECT_NE(report.to_text().find("hits_at_1\t0.783000\tquestions\t1000"), std::string::npos);
  pred.back().id = "nope";
  EXPECT_EQ(kind_of([&] { hits_at_1(pred, ex); }), ErrorKind::kContract);
  pred.pop_back();
  EXPECT_EQ(kind_of([&] { hits_at_1(pred, ex); }), ErrorKind::kContract);
}

TEST(ExperimentConfig, ParsesAndFingerprints) {
  const auto a = parse_experiment_config("kg = kb.tsv\n# c\nk = 7\nuse_text = false\ndrop = per_question\n", "/base");
  EXPECT_EQ(a.kg, std::filesystem::path("/base/kb.tsv"));
  EXPECT_EQ(a.k, 7);
  EXPECT_FALSE(a.beam.use_text);
  EXPECT_EQ(a.drop, "per_question");
  const auto b = parse_experiment_config("kg = kb.tsv\nk = 8\nuse_text = false\ndrop = per_question\n", "/base");
  EXPECT_NE(fingerprint(a), fingerprint(b));
  EXPECT_EQ(fingerprint(a), fingerprint(parse_experiment_config(a.canonical(), "/base")));
  EXPECT_EQ(kind_of([] { parse_experiment_config("bogus = 1\n"); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] { parse_experiment_config("k = many\n"); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] { parse_experiment_config("use_kbc = maybe\n"); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] { parse_experiment_config("drop = sometimes\n"); }), ErrorKind::kConfig);
}

TEST(Experiment, StageNameInErrors) {
  auto cfg = parse_experiment_config("kg = /nonexistent/kb.tsv\ntrain = t\ntest = t\nrevise = false\n");
  try {
    run_experiment(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()).rfind("stage ingest:", 0), 0u) << e.what();
  }
  cfg = parse_experiment_config("kg = kb.tsv\n");
  EXPECT_EQ(kind_of([&] { run_experiment(cfg); }), ErrorKind::kConfig);
}

TEST(Experiment, AblationVariantNames) {
  EXPECT_EQ(ablation_variants(),
            (std::vector<std::string>{"full", "no-text", "no-kbc", "no-revise", "text-only", "kb-only"}));
}

}  // namespace
}  // namespace cbr
