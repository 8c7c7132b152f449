// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include <gtest/gtest.h>

#include <memory>

#include "cbrikb/reason.hpp"
#include "error_kind.hpp"

namespace cbr {
namespace {

using testing::kind_of;

BeamConfig symbolic_only() {
  BeamConfig c;
  c.use_kbc = false;
  c.use_text = false;
  c.max_results = 0;
  return c;
}

Case chain_case(std::string id, std::string_view chain) {
  Case c;
  c.case_id = std::move(id);
  c.question = mask_question("q [x]");
  c.embedding = EmbeddingVector{{1.f, 0.f}};
  c.chains.push_back(InferentialChain::parse(chain));
  return c;
}

struct TextFixture {
  KnowledgeGraph kg;
  std::shared_ptr<LexicalScorer> scorer;
  std::unique_ptr<ReAligner> aligner;

  TextFixture() {
    kg.add_triple("Other", "directed_by", "Someone");
    kg.add_triple("Other", "written_by", "Someone");
    Document d{"d1", "Heat was directed by Mann", {{"Heat", 0, 4}, {"Mann", 21, 25}}};
    kg.add_documents(std::vector<Document>{d});
    const std::vector<std::string> rels = {"directed_by", "written_by"};
    auto proxies = parse_proxy_texts(
        "directed_by\t<SUBJ> was directed by <OBJ>\nwritten_by\t<SUBJ> was written by <OBJ>\n", rels);
    scorer = std::make_shared<LexicalScorer>(proxies);
    aligner = std::make_unique<ReAligner>(scorer, proxies);
  }
};

TEST(StepScore, ExactMatchInBothDirections) {
  KnowledgeGraph kg;
  kg.add_triple("m", "directed_by", "p");
  const Reasoner r(kg, symbolic_only(), {});
  const auto fwd = r.step_score(kg, kg.entity("m"), "directed_by", Direction::kForward, kg.entity("p"));
  EXPECT_EQ(fwd.value, 1.0);
  EXPECT_EQ(fwd.source, StepSource::kExactMatch);
  const auto inv = r.step_score(kg, kg.entity("p"), "directed_by", Direction::kInverse, kg.entity("m"));
  EXPECT_EQ(inv.value, 1.0);
  const auto none = r.step_score(kg, kg.entity("p"), "directed_by", Direction::kForward, kg.entity("m"));
  EXPECT_EQ(none.value, 0.0);
  EXPECT_EQ(none.source, StepSource::kNone);
  EXPECT_EQ(to_string(StepSource::kTextSupport), "text");
}

TEST(StepScore, KbcFallbackScoresForwardTripleForInverseSteps) {
  KnowledgeGraph kg;
  kg.add_triple("a", "r", "b");
  kg.intern_entity("c");
  ComplExModel m(1, {"a", "b", "c"}, {"r"});
  m.entity_re = {1.0, 2.0, 0.5};
  m.entity_im = {0.0, 0.0, 1.0};
  m.relation_re = {0.5};
  m.relation_im = {1.0};
  BeamConfig cfg = symbolic_only();
  cfg.use_kbc = true;
  const Reasoner r(kg, cfg, {&m, nullptr});
  const auto s = r.step_score(kg, kg.entity("c"), "r", Direction::kInverse, kg.entity("a"));
  EXPECT_EQ(s.source, StepSource::kKbc);
  EXPECT_DOUBLE_EQ(s.value, kbc_prob(m, "a", "r", "c"));
}

TEST(StepScore, DeletedTripleRecoveredFromText) {
  TextFixture f;
  BeamConfig cfg = symbolic_only();
  cfg.use_text = true;
  const Reasoner r(f.kg, cfg, {nullptr, f.aligner.get()});
  const auto s = r.step_score(f.kg, f.kg.entity("Heat"), "directed_by", Direction::kForward, f.kg.entity("Mann"));
  EXPECT_EQ(s.source, StepSource::kTextSupport);
  EXPECT_GT(s.value, 0.5);
  const auto w = r.step_score(f.kg, f.kg.entity("Heat"), "written_by", Direction::kForward, f.kg.entity("Mann"));
  EXPECT_LT(w.value, s.value);
}

TEST(Validate, RejectsBadConfigAndMissingModels) {
  KnowledgeGraph kg;
  BeamConfig cfg = symbolic_only();
  cfg.beam_width = 0;
  EXPECT_EQ(kind_of([&] { validate(cfg, {}); }), ErrorKind::kContract);
  cfg = symbolic_only();
  cfg.kbc_threshold = 1.5;
  EXPECT_EQ(kind_of([&] { validate(cfg, {}); }), ErrorKind::kContract);
  EXPECT_EQ(kind_of([&] { Reasoner(kg, BeamConfig{}, {}); }), ErrorKind::kContract);
  const Reasoner r(kg, symbolic_only(), {});
  const Document d{"d", "a b", {{"a", 0, 1}, {"b", 2, 3}}};
  EXPECT_EQ(kind_of([&] { r.align_free_form(d); }), ErrorKind::kConfig);
}

TEST(Vote, SumsAcrossCases) {
  KnowledgeGraph kg;
  kg.add_triple("q", "r", "X");
  kg.add_triple("q", "s", "Y");
  CaseBase cb;
  cb.add(chain_case("c1", "r"));
  cb.add(chain_case("c2", "r"));
  cb.add(chain_case("c3", "r"));
  cb.add(chain_case("c4", "s"));
  const Reasoner r(kg, symbolic_only(), {});
  const auto hits = knn(cb, EmbeddingVector{{1.f, 0.f}}, RetrievalConfig{});
  const EntityId q = kg.entity("q");
  const auto answers = r.vote(hits, kg, std::span(&q, 1));
  EXPECT_DOUBLE_EQ(answers.score_of("X"), 3.0);
  EXPECT_DOUBLE_EQ(answers.score_of("Y"), 1.0);
  EXPECT_EQ(answers.ranking, (std::vector<std::string>{"X", "Y"}));
  EXPECT_EQ(answers.answers.at("X").provenance.size(), 3u);
}

TEST(Vote, QueryEntityExcludedUnlessAlone) {
  KnowledgeGraph kg;
  kg.add_triple("q", "r", "X");
  const Reasoner r(kg, symbolic_only(), {});
  const EntityId q = kg.entity("q");
  CaseBase both;
  both.add(chain_case("c1", "r,r^-1"));
  both.add(chain_case("c2", "r"));
  const auto a = r.vote(knn(both, EmbeddingVector{{1.f, 0.f}}, RetrievalConfig{}), kg, std::span(&q, 1));
  EXPECT_TRUE(a.answers.contains("q"));
  EXPECT_EQ(a.ranking, std::vector<std::string>{"X"});
  CaseBase only;
  only.add(chain_case("c1", "r,r^-1"));
  const auto b = r.vote(knn(only, EmbeddingVector{{1.f, 0.f}}, RetrievalConfig{}), kg, std::span(&q, 1));
  EXPECT_EQ(b.ranking, std::vector<std::string>{"q"});
}

TEST(Vote, AbstainsWhenNothingReached) {
  KnowledgeGraph kg;
  kg.add_triple("q", "r", "X");
  const Reasoner r(kg, symbolic_only(), {});
  CaseBase cb;
  cb.add(chain_case("c1", "nope"));
  const EntityId q = kg.entity("q");
  const auto a = r.vote(knn(cb, EmbeddingVector{{1.f, 0.f}}, RetrievalConfig{}), kg, std::span(&q, 1));
  EXPECT_TRUE(a.abstained());
}

TEST(Answer, EndToEndWithExplanation) {
  KnowledgeGraph kg;
  kg.add_triple("Heat", "directed_by", "Mann");
  kg.add_triple("Alien", "directed_by", "Scott");
  const HashEmbedder embedder(32, 2);
  CaseBase cb;
  cb.add(build_case("c1", "who directed [Alien]", std::vector<std::string>{"Scott"}, kg, embedder));
  const Reasoner r(kg, symbolic_only(), {});
  const auto res = answer("who directed [Heat]", cb, embedder, RetrievalConfig{}, r);
  ASSERT_FALSE(res.answers.abstained());
  EXPECT_EQ(res.answers.ranking.front(), "Mann");
  const auto text = res.explanation.to_text(res.answers, 5);
  EXPECT_NE(text.find("neighbor\tc1"), std::string::npos) << text;
  EXPECT_NE(text.find("answer\t1\tMann"), std::string::npos) << text;
  EXPECT_NE(text.find("exact"), std::string::npos) << text;
  EXPECT_EQ(kind_of([&] { answer("who directed it", cb, embedder, RetrievalConfig{}, r); }), ErrorKind::kInput);
  const auto missing = answer("who directed [Ghost]", cb, embedder, RetrievalConfig{}, r);
  EXPECT_TRUE(missing.answers.abstained());
  EXPECT_EQ(missing.explanation.missing_entities, std::vector<std::string>{"Ghost"});
}

}  // namespace
}  // namespace cbr
