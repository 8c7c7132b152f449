// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace cbr {

inline constexpr std::string_view kMaskToken = "<MASK>";

enum class MaskMode {
  kPerToken,  // every mention token becomes <MASK>
  kCollapse,  // each mention becomes a single <MASK>
  kOff,       // mention tokens kept (unmasked ablation)
};

MaskMode parse_mask_mode(std::string_view text);

struct MaskedQuestion {
  std::string raw;
  std::vector<std::string> masked;
  std::vector<std::string> mentions;  // bracket contents, verbatim
  int mention_count = 0;

  /// Space-joined masked tokens; the lookup key for embedding tables.
  std::string text() const;
};

/// Tokenizes `raw`, replacing bracketed mentions according to `mode`.
/// Throws kParse (with 1-based column) on unbalanced, nested or empty brackets.
MaskedQuestion mask_question(std::string_view raw, MaskMode mode = MaskMode::kPerToken);

struct EmbeddingVector {
  std::vector<float> values;

  std::size_t dim() const { return values.size(); }
  double norm() const;
  bool is_zero() const;
  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

/// Cosine similarity, 0 when either side is the zero vector.
/// Throws kContract on dimension mismatch.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

/// L2-normalizes in place; zero vectors stay zero.
void normalize(EmbeddingVector& v);

/// Signed feature hashing of unigrams and bigrams, L2-normalized.
EmbeddingVector hash_embed(const MaskedQuestion& question, int dim, std::uint64_t seed);

struct EmbeddingTable {
  std::uint32_t dim = 0;
  std::map<std::string, EmbeddingVector> entries;
};

/// CBRE v1: "CBRE", u32 version, u32 dim, u64 count, then per record
/// u32 key length, key bytes, dim x f32. All little-endian.
std::string encode_embeddings(const EmbeddingTable& table);
EmbeddingTable decode_embeddings(std::string_view bytes);
void store_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);
EmbeddingTable load_embeddings(const std::filesystem::path& path);

/// Maps a masked question to its case representation.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual int dim() const = 0;
  virtual EmbeddingVector embed(const MaskedQuestion& question) const = 0;
  virtual std::string name() const = 0;
};

class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(int dim = 256, std::uint64_t seed = 17);
  int dim() const override { return dim_; }
  EmbeddingVector embed(const MaskedQuestion& question) const override;
  std::string name() const override;

 private:
  int dim_;
  std::uint64_t seed_;
};

/// Serves precomputed vectors keyed by masked text (e.g. exported from a
/// sentence encoder). Unknown keys throw kNotFound.
class TableEmbedder final : public Embedder {
 public:
  explicit TableEmbedder(EmbeddingTable table);
  int dim() const override { return static_cast<int>(table_.dim); }
  EmbeddingVector embed(const MaskedQuestion& question) const override;
  std::string name() const override { return "table"; }
  const EmbeddingTable& table() const { return table_; }

 private:
  EmbeddingTable table_;
};

/// "hash", "hash:<dim>", "hash:<dim>:<seed>" or "file:<path>".
std::unique_ptr<Embedder> make_embedder(std::string_view descriptor);

}  // namespace cbr
