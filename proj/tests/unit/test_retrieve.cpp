// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include <gtest/gtest.h>

#include "cbrikb/retrieve.hpp"
#include "error_kind.hpp"

namespace cbr {
namespace {

using testing::kind_of;

Case make_case(std::string id, std::vector<float> v, std::string raw = "q [x]") {
  Case c;
  c.case_id = std::move(id);
  c.question = mask_question(raw);
  c.embedding = EmbeddingVector{std::move(v)};
  return c;
}

std::vector<std::string> ids(const std::vector<RetrievedNeighbor>& hits) {
  std::vector<std::string> out;
  for (const auto& h : hits) out.push_back(h.case_ptr->case_id);
  return out;
}

TEST(Knn, TiesAtTheCutoffAreKept) {
  CaseBase cb(2);
  cb.add(make_case("a", {1.f, 0.f}));
  cb.add(make_case("b", {1.f, 1.f}));
  cb.add(make_case("c", {1.f, 1.f}));
  cb.add(make_case("d", {1.f, 1.f}));
  const EmbeddingVector q{{1.f, 0.05f}};
  RetrievalConfig cfg;
  cfg.k = 2;
  const auto hits = knn(cb, q, cfg);
  EXPECT_EQ(ids(hits), (std::vector<std::string>{"a", "b", "c", "d"}));
  for (std::size_t i = 1; i < hits.size(); ++i) EXPECT_GE(hits[i - 1].similarity, hits[i].similarity);
}

TEST(Knn, EmptyBaseAndContracts) {
  const CaseBase empty(2);
  RetrievalConfig cfg;
  EXPECT_TRUE(knn(empty, EmbeddingVector{{1.f, 0.f}}, cfg).empty());
  CaseBase cb(2);
  cb.add(make_case("a", {1.f, 0.f}));
  EXPECT_EQ(kind_of([&] { knn(cb, EmbeddingVector{{1.f, 0.f, 0.f}}, cfg); }), ErrorKind::kContract);
  cfg.k = 0;
  EXPECT_EQ(kind_of([&] { knn(cb, EmbeddingVector{{1.f, 0.f}}, cfg); }), ErrorKind::kContract);
}

TEST(Knn, MinSimilarityFloor) {
  CaseBase cb(2);
  cb.add(make_case("near", {1.f, 0.f}));
  cb.add(make_case("far", {0.f, 1.f}));
  RetrievalConfig cfg;
  cfg.k = 5;
  cfg.min_similarity = 0.5;
  EXPECT_EQ(ids(knn(cb, EmbeddingVector{{1.f, 0.f}}, cfg)), std::vector<std::string>{"near"});
}

TEST(Inspect, UnmaskedLookupFavorsEntityOverlap) {
  // Same template, different entities; the unmasked view is pulled toward the
  // case sharing the entity name while the masked view cannot tell them apart.
  const HashEmbedder embedder(256, 4);
  CaseBase cb;
  for (const auto& [id, raw] : std::vector<std::pair<std::string, std::string>>{
           {"same", "who directed [Blade Runner]"}, {"other", "what genre is [Blade Runner]"},
           {"tmpl", "who directed [Alien]"}}) {
    Case c;
    c.case_id = id;
    c.question = mask_question(raw);
    c.embedding = embedder.embed(c.question);
    cb.add(std::move(c));
  }
  RetrievalConfig cfg;
  cfg.k = 1;
  const auto masked = inspect_neighbors(cb, "who directed [Blade Runner]", embedder, cfg, true);
  EXPECT_EQ(masked.query, "who directed <MASK> <MASK>");
  ASSERT_GE(masked.rows.size(), 1u);
  EXPECT_EQ(masked.rows[0].case_id, "same");
  const auto masked_alien = inspect_neighbors(cb, "who directed [Ridley Scott]", embedder, cfg, true);
  EXPECT_EQ(masked_alien.rows.size(), 1u);  // only the two-token mention matches exactly
  const auto plain = inspect_neighbors(cb, "what genre is [Blade Runner]", embedder, cfg, false);
  EXPECT_FALSE(plain.masked);
  ASSERT_EQ(plain.rows.size(), 1u);
  EXPECT_EQ(plain.rows[0].case_id, "other");
  EXPECT_FALSE(plain.to_text().empty());
}

}  // namespace
}  // namespace cbr
