// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "cbrikb/error.hpp"
#include "cbrikb/kg.hpp"
#include "cbrikb/rng.hpp"
#include "error_kind.hpp"

namespace cbr {
namespace {

using testing::kind_of;

Document doc(std::string id, std::string text, std::vector<std::string> names) {
  Document d{std::move(id), std::move(text), {}};
  for (auto& n : names) {
    const auto pos = d.text.find(n);
    d.mentions.push_back(Mention{n, pos, pos + n.size()});
  }
  return d;
}

TEST(Ingest, CountsAndDeduplicates) {
  const auto r = ingest_kb("a\tr\tb\n# comment\n\na\tr\tb\nb\ts\tc\n");
  EXPECT_EQ(r.report.entities, 3u);
  EXPECT_EQ(r.report.relations, 2u);
  EXPECT_EQ(r.report.triples, 2u);
  EXPECT_EQ(r.report.duplicates, 1u);
  EXPECT_EQ(r.graph.triple_count(), 2u);
}

TEST(Ingest, EmptyInputGivesEmptyGraph) {
  const auto r = ingest_kb("");
  EXPECT_EQ(r.graph.entity_count(), 0u);
  EXPECT_EQ(r.graph.triple_count(), 0u);
}

TEST(Ingest, MalformedLinesReportLineNumber) {
  try {
    ingest_kb("a\tr\tb\na\tr\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParse);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_EQ(kind_of([] { ingest_kb("a\t\tb\n"); }), ErrorKind::kParse);
}

TEST(Ingest, PipeDelimiter) {
  const auto r = ingest_kb("a|r|b\n", '|');
  EXPECT_EQ(r.graph.triple_count(), 1u);
}

TEST(TextEdges, OrderedPairsPerDocument) {
  KnowledgeGraph kg;
  kg.add_documents(std::vector<Document>{doc("d1", "X directed Y", {"X", "Y"})});
  EXPECT_EQ(kg.triple_count(), 2u);
  kg.add_documents(std::vector<Document>{doc("d2", "A met B and C", {"A", "B", "C"})});
  EXPECT_EQ(kg.triple_count(), 2u + 6u);
  kg.add_documents(std::vector<Document>{doc("d3", "only Z", {"Z"})});
  EXPECT_EQ(kg.triple_count(), 8u);
  EXPECT_EQ(kg.symbolic_triple_count(), 0u);
}

TEST(TextEdges, OutOfBoundsSpanRejected) {
  KnowledgeGraph kg;
  Document d{"d", "short", {Mention{"x", 2, 40}}};
  EXPECT_EQ(kind_of([&] { kg.add_documents(std::vector<Document>{d}); }), ErrorKind::kValidation);
}

TEST(TextEdges, SymbolicTriplesUntouched) {
  KnowledgeGraph kg;
  kg.add_triple("X", "r", "Y");
  const auto before = kg.triples();
  kg.add_documents(std::vector<Document>{doc("d", "X and Y", {"X", "Y"})});
  for (const auto& t : before) EXPECT_TRUE(kg.contains(t));
  EXPECT_EQ(kg.symbolic_triple_count(), 1u);
}

TEST(TextEdges, MentionsStoredInTextOrder) {
  KnowledgeGraph kg;
  Document d = doc("d", "B then A", {"A", "B"});
  kg.add_documents(std::vector<Document>{d});
  const Document* stored = kg.find_document("d");
  ASSERT_NE(stored, nullptr);
  EXPECT_EQ(stored->mentions.front().entity, "B");
}

TEST(Neighbors, DirectionsAndFilter) {
  KnowledgeGraph kg;
  kg.add_triple("a", "r", "b");
  kg.add_triple("c", "s", "a");
  kg.intern_entity("lonely");
  kg.add_documents(std::vector<Document>{doc("d", "a with c", {"a", "c"})});
  const auto all = kg.neighbors(kg.entity("a"), true);
  const auto sym = kg.neighbors(kg.entity("a"), false);
  EXPECT_EQ(all.size(), 4u);  // r fwd, s inv, two text edges
  ASSERT_EQ(sym.size(), 2u);
  EXPECT_EQ(sym[0].direction, Direction::kForward);
  EXPECT_EQ(sym[1].direction, Direction::kInverse);
  EXPECT_TRUE(kg.neighbors(kg.entity("lonely"), true).empty());
  EXPECT_EQ(kind_of([&] { kg.neighbors(EntityId{999}, true); }), ErrorKind::kNotFound);
}

TEST(Neighbors, AdjacencyIsConsistent) {
  SplitMix64 rng(3);
  KnowledgeGraph kg;
  for (int i = 0; i < 60; ++i) {
    kg.add_triple("n" + std::to_string(rng.below(15)), "r" + std::to_string(rng.below(3)),
                  "n" + std::to_string(rng.below(15)));
  }
  std::size_t forward = 0;
  for (EntityId e : kg.entities()) {
    for (const auto& n : kg.neighbors(e, true)) {
      if (n.direction != Direction::kForward) continue;
      ++forward;
      const auto back = kg.neighbors(n.entity, true);
      EXPECT_NE(std::find(back.begin(), back.end(), Neighbor{n.relation, Direction::kInverse, e}), back.end());
    }
  }
  EXPECT_EQ(forward, kg.triple_count());
}

TEST(SubKb, PathGraphDepth) {
  KnowledgeGraph kg;
  kg.add_triple("a", "r", "b");
  kg.add_triple("b", "r", "c");
  kg.add_triple("c", "r", "d");
  const EntityId seed = kg.entity("a");
  const auto sub = kg.subkb(std::span(&seed, 1), 2);
  EXPECT_EQ(sub.entity_count(), 3u);
  EXPECT_FALSE(sub.find_entity("d").has_value());
  EXPECT_EQ(sub.triple_count(), 2u);
}

TEST(SubKb, MatchesAllPairsDistanceOracle) {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 30;
    KnowledgeGraph kg;
    std::vector<std::vector<int>> dist(n, std::vector<int>(n, 1 << 20));
    for (int i = 0; i < n; ++i) {
      kg.intern_entity("v" + std::to_string(i));
      dist[i][i] = 0;
    }
    for (int k = 0; k < 35; ++k) {
      const int a = static_cast<int>(rng.below(n)), b = static_cast<int>(rng.below(n));
      kg.add_triple("v" + std::to_string(a), "r", "v" + std::to_string(b));
      dist[a][b] = std::min(dist[a][b], 1);
      dist[b][a] = std::min(dist[b][a], 1);
    }
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dist[i][j] = std::min(dist[i][j], dist[i][k] + dist[k][j]);
    const int seed = static_cast<int>(rng.below(n));
    const EntityId s = kg.entity("v" + std::to_string(seed));
    for (int hops = 1; hops <= 3; ++hops) {
      const auto sub = kg.subkb(std::span(&s, 1), hops);
      std::size_t expected = 0;
      for (int i = 0; i < n; ++i) {
        const bool in = dist[seed][i] <= hops;
        expected += in;
        EXPECT_EQ(sub.find_entity("v" + std::to_string(i)).has_value(), in);
      }
      EXPECT_EQ(sub.entity_count(), expected);
      // Monotone in the radius.
      const auto wider = kg.subkb(std::span(&s, 1), hops + 1);
      for (const auto& t : sub.triples()) EXPECT_TRUE(wider.contains(t));
    }
  }
}

TEST(ShortestPaths, TrivialAndDiamond) {
  KnowledgeGraph kg;
  kg.add_triple("a", "r", "b");
  kg.add_triple("b", "r", "d");
  kg.add_triple("a", "r", "c");
  kg.add_triple("c", "r", "d");
  kg.add_triple("a", "loop", "a");
  const auto self = kg.shortest_paths(kg.entity("a"), kg.entity("a"));
  ASSERT_EQ(self.size(), 1u);
  EXPECT_EQ(self[0].length(), 0u);
  const auto two = kg.shortest_paths(kg.entity("a"), kg.entity("d"));
  ASSERT_EQ(two.size(), 2u);
  for (const auto& p : two) EXPECT_EQ(p.length(), 2u);
  PathOptions tight;
  tight.max_len = 1;
  EXPECT_TRUE(kg.shortest_paths(kg.entity("a"), kg.entity("d"), tight).empty());
}

TEST(ShortestPaths, InverseTraversalFlagged) {
  KnowledgeGraph kg;
  kg.add_triple("m", "directed_by", "p");
  const auto paths = kg.shortest_paths(kg.entity("p"), kg.entity("m"));
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0].directions[0], Direction::kInverse);
  PathOptions fwd;
  fwd.forward_only = true;
  EXPECT_TRUE(kg.shortest_paths(kg.entity("p"), kg.entity("m"), fwd).empty());
}

TEST(WithWithout, RoundTrip) {
  KnowledgeGraph kg;
  kg.add_triple("a", "r", "b");
  kg.add_triple("b", "r", "c");
  const Triple t = kg.triples()[0];
  TripleSet gone{t};
  const auto less = kg.without(gone);
  EXPECT_EQ(less.triple_count(), 1u);
  EXPECT_FALSE(less.contains(t));
  const auto back = less.with(std::span(&t, 1));
  EXPECT_TRUE(back.contains(t));
  EXPECT_EQ(back.triple_count(), 2u);
}

TEST(Documents, ParseAndSerializeRoundTrip) {
  const auto docs = parse_documents("d1\tAlice met Bob\n", "d1\tAlice\t0\t5\nd1\tBob\t10\t13\n");
  ASSERT_EQ(docs.size(), 1u);
  ASSERT_EQ(docs[0].mentions.size(), 2u);
  EXPECT_EQ(docs[0].text.substr(docs[0].mentions[1].begin, 3), "Bob");
  const auto again = parse_documents(serialize_documents(docs), serialize_mentions(docs));
  EXPECT_EQ(again[0].text, docs[0].text);
  EXPECT_EQ(again[0].mentions.size(), 2u);
}

}  // namespace
}  // namespace cbr
