// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "cbrikb/binary.hpp"
#include "cbrikb/embed.hpp"
#include "cbrikb/rng.hpp"
#include "error_kind.hpp"

namespace cbr {
namespace {

using testing::kind_of;

TEST(Mask, PerTokenReplacement) {
  const auto q = mask_question("Who are the directors of the movies written by [Peter Facinelli]");
  EXPECT_EQ(q.text(), "who are the directors of the movies written by <MASK> <MASK>");
  EXPECT_EQ(q.mention_count, 1);
  ASSERT_EQ(q.mentions.size(), 1u);
  EXPECT_EQ(q.mentions[0], "Peter Facinelli");
  EXPECT_EQ(mask_question("[A] met [B C]").text(), "<MASK> met <MASK> <MASK>");
}

TEST(Mask, NoMentionsAndModes) {
  const auto plain = mask_question("hello");
  EXPECT_EQ(plain.text(), "hello");
  EXPECT_EQ(plain.mention_count, 0);
  EXPECT_EQ(mask_question("[A] met [B C]", MaskMode::kCollapse).text(), "<MASK> met <MASK>");
  EXPECT_EQ(mask_question("[A] met [B C]", MaskMode::kOff).text(), "a met b c");
}

TEST(Mask, BracketErrorsCarryColumn) {
  for (const char* bad : {"who [directed", "who ]x", "[a [b]]", "empty []"}) {
    EXPECT_EQ(kind_of([&] { mask_question(bad); }), ErrorKind::kParse) << bad;
  }
  try {
    mask_question("ab ]");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("column 4"), std::string::npos) << e.what();
  }
}

TEST(HashEmbed, DeterministicNormalizedAndMaskInvariant) {
  const auto a = hash_embed(mask_question("who directed [X]"), 64, 5);
  const auto b = hash_embed(mask_question("who directed [Y]"), 64, 5);
  EXPECT_EQ(a, b);
  EXPECT_NEAR(a.norm(), 1.0, 1e-6);
  EXPECT_EQ(a, hash_embed(mask_question("who directed [X]"), 64, 5));
  EXPECT_NE(a, hash_embed(mask_question("who wrote [X]"), 64, 5));
  EXPECT_TRUE(hash_embed(mask_question("?!"), 64, 5).is_zero());
}

TEST(Cosine, ExamplesAndContract) {
  const EmbeddingVector x{{1.f, 0.f}}, y{{0.f, 1.f}}, z{{0.f, 0.f}};
  EXPECT_DOUBLE_EQ(cosine(x, x), 1.0);
  EXPECT_DOUBLE_EQ(cosine(x, y), 0.0);
  EXPECT_DOUBLE_EQ(cosine(x, z), 0.0);
  EXPECT_EQ(kind_of([&] { cosine(x, EmbeddingVector{{1.f}}); }), ErrorKind::kContract);
}

TEST(Cosine, MatchesLongDoubleReference) {
  SplitMix64 rng(8);
  for (int t = 0; t < 200; ++t) {
    EmbeddingVector a, b;
    for (int i = 0; i < 32; ++i) {
      a.values.push_back(static_cast<float>(rng.uniform(-1, 1)));
      b.values.push_back(static_cast<float>(rng.uniform(-1, 1)));
    }
    long double dot = 0, na = 0, nb = 0;
    for (int i = 0; i < 32; ++i) {
      dot += static_cast<long double>(a.values[i]) * b.values[i];
      na += static_cast<long double>(a.values[i]) * a.values[i];
      nb += static_cast<long double>(b.values[i]) * b.values[i];
    }
    const double want = static_cast<double>(dot / std::sqrt(na * nb));
    EXPECT_NEAR(cosine(a, b), want, 1e-9);
    EXPECT_DOUBLE_EQ(cosine(a, b), cosine(b, a));
  }
}

// Reference CBRE writer, independent of encode_embeddings.
std::string reference_cbre(std::uint32_t dim, const std::vector<std::pair<std::string, std::vector<float>>>& rows) {
  std::string out = "CBRE";
  auto put = [&](std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  put(1, 4);
  put(dim, 4);
  put(rows.size(), 8);
  for (const auto& [key, vec] : rows) {
    put(key.size(), 4);
    out += key;
    for (float f : vec) {
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put(bits, 4);
    }
  }
  return out;
}

TEST(Cbre, ReferenceFixtureLoads) {
  const std::vector<std::pair<std::string, std::vector<float>>> rows = {
      {"what <MASK>", {0.f, 0.f, 1.f}},
      {"who directed <MASK>", {0.6f, 0.8f, 0.f}},
      {"zero", {0.f, 0.f, 0.f}},
  };
  const auto table = decode_embeddings(reference_cbre(3, rows));
  EXPECT_EQ(table.dim, 3u);
  ASSERT_EQ(table.entries.size(), 3u);
  for (const auto& [key, vec] : rows) {
    const EmbeddingVector original{vec};
    const auto& loaded = table.entries.at(key);
    if (original.is_zero()) EXPECT_TRUE(loaded.is_zero());
    else EXPECT_NEAR(cosine(loaded, original), 1.0, 1e-12);
  }
  // The encoder writes records in key order; rows above are already sorted.
  EXPECT_EQ(encode_embeddings(table), reference_cbre(3, rows));
}

TEST(Cbre, RoundTripAndRenormalization) {
  EmbeddingTable t;
  t.dim = 2;
  t.entries["a"] = EmbeddingVector{{3.f, 4.f}};
  const auto loaded = decode_embeddings(encode_embeddings(t));
  EXPECT_NEAR(loaded.entries.at("a").norm(), 1.0, 1e-6);
  EXPECT_FLOAT_EQ(loaded.entries.at("a").values[0], 0.6f);

  EmbeddingTable empty;
  empty.dim = 4;
  const auto e = decode_embeddings(encode_embeddings(empty));
  EXPECT_TRUE(e.entries.empty());
  EXPECT_EQ(e.dim, 4u);
}

TEST(Cbre, FormatErrors) {
  std::string good = reference_cbre(2, {{"k", {1.f, 0.f}}});
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_EQ(kind_of([&] { decode_embeddings(bad_magic); }), ErrorKind::kFormat);
  std::string bad_version = good;
  bad_version[4] = 9;
  EXPECT_EQ(kind_of([&] { decode_embeddings(bad_version); }), ErrorKind::kFormat);
  try {
    decode_embeddings(good.substr(0, good.size() - 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFormat);
    EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos);
  }
}

TEST(Embedder, FactoryDescriptors) {
  EXPECT_EQ(make_embedder("hash")->dim(), 256);
  EXPECT_EQ(make_embedder("hash:32")->dim(), 32);
  EXPECT_EQ(make_embedder("hash:32:9")->name(), make_embedder("hash:32:9")->name());
  EXPECT_EQ(kind_of([] { make_embedder("bogus"); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] { make_embedder("hash:4"); }), ErrorKind::kConfig);
}

TEST(Embedder, TableLookupByMaskedText) {
  EmbeddingTable t;
  t.dim = 2;
  t.entries["who directed <MASK>"] = EmbeddingVector{{1.f, 0.f}};
  TableEmbedder e(t);
  EXPECT_EQ(e.embed(mask_question("who directed [Z]")).values[0], 1.f);
  EXPECT_EQ(kind_of([&] { e.embed(mask_question("who wrote [Z]")); }), ErrorKind::kNotFound);
}

}  // namespace
}  // namespace cbr
