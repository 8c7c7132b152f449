// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include "cbrikb/embed.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "cbrikb/binary.hpp"
#include "cbrikb/error.hpp"
#include "cbrikb/text.hpp"

namespace cbr {

namespace {

constexpr std::string_view kMagic = "CBRE";
constexpr std::uint32_t kVersion = 1;

}  // namespace

MaskMode parse_mask_mode(std::string_view text) {
  if (text == "per-token") return MaskMode::kPerToken;
  if (text == "collapse") return MaskMode::kCollapse;
  if (text == "off") return MaskMode::kOff;
  throw_error(ErrorKind::kConfig, "unknown mask mode '" + std::string(text) + "'");
}

std::string MaskedQuestion::text() const { return join(masked, " "); }

MaskedQuestion mask_question(std::string_view raw, MaskMode mode) {
  MaskedQuestion q;
  q.raw = std::string(raw);
  std::size_t segment_start = 0;
  std::size_t open = std::string_view::npos;
  auto emit_plain = [&](std::string_view s) {
    for (auto& t : tokenize(s)) q.masked.push_back(std::move(t));
  };
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    if (c == '[') {
      if (open != std::string_view::npos) {
        throw_error(ErrorKind::kParse, "nested '[' at column " + std::to_string(i + 1));
      }
      emit_plain(raw.substr(segment_start, i - segment_start));
      open = i;
    } else if (c == ']') {
      if (open == std::string_view::npos) {
        throw_error(ErrorKind::kParse, "unmatched ']' at column " + std::to_string(i + 1));
      }
      const std::string_view mention = trim(raw.substr(open + 1, i - open - 1));
      if (mention.empty()) {
        throw_error(ErrorKind::kParse, "empty mention at column " + std::to_string(open + 1));
      }
      q.mentions.emplace_back(mention);
      ++q.mention_count;
      switch (mode) {
        case MaskMode::kPerToken:
          for (std::size_t k = 0; k < mention.size(); ++k) {
            const bool starts = !std::isspace(static_cast<unsigned char>(mention[k])) &&
                                (k == 0 || std::isspace(static_cast<unsigned char>(mention[k - 1])));
            if (starts) q.masked.emplace_back(kMaskToken);
          }
          break;
        case MaskMode::kCollapse:
          q.masked.emplace_back(kMaskToken);
          break;
        case MaskMode::kOff:
          emit_plain(mention);
          break;
      }
      open = std::string_view::npos;
      segment_start = i + 1;
    }
  }
  if (open != std::string_view::npos) {
    throw_error(ErrorKind::kParse, "unclosed '[' at column " + std::to_string(open + 1));
  }
  emit_plain(raw.substr(segment_start));
  return q;
}

double EmbeddingVector::norm() const {
  double s = 0.0;
  for (float v : values) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

bool EmbeddingVector::is_zero() const {
  for (float v : values) {
    if (v != 0.0f) return false;
  }
  return true;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  require(a.dim() == b.dim(), "cosine: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                                  std::to_string(b.dim()) + ")");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double x = a.values[i];
    const double y = b.values[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

void normalize(EmbeddingVector& v) {
  const double n = v.norm();
  if (n == 0.0) return;
  for (float& x : v.values) x = static_cast<float>(x / n);
}

EmbeddingVector hash_embed(const MaskedQuestion& question, int dim, std::uint64_t seed) {
  require(dim >= 8, "hash_embed: dim must be >= 8");
  std::vector<double> acc(static_cast<std::size_t>(dim), 0.0);
  const std::uint64_t bucket_seed = fnv1a64("bucket", 0xcbf29ce484222325ULL ^ seed);
  const std::uint64_t sign_seed = fnv1a64("sign", 0x84222325cbf29ce4ULL ^ (seed * 0x9E3779B97F4A7C15ULL));
  auto add = [&](std::string_view feature) {
    const std::uint64_t b = fnv1a64(feature, bucket_seed);
    const std::uint64_t s = fnv1a64(feature, sign_seed);
    acc[b % static_cast<std::uint64_t>(dim)] += (s >> 63) ? -1.0 : 1.0;
  };
  const auto& toks = question.masked;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    add(toks[i]);
    if (i + 1 < toks.size()) add(toks[i] + " " + toks[i + 1]);
  }
  double n = 0.0;
  for (double x : acc) n += x * x;
  n = std::sqrt(n);
  EmbeddingVector v;
  v.values.resize(acc.size(), 0.0f);
  if (n > 0.0) {
    for (std::size_t i = 0; i < acc.size(); ++i) v.values[i] = static_cast<float>(acc[i] / n);
  }
  return v;
}

std::string encode_embeddings(const EmbeddingTable& table) {
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u32(table.dim);
  w.u64(table.entries.size());
  for (const auto& [key, vec] : table.entries) {
    require(vec.dim() == table.dim, "store_embeddings: entry '" + key + "' has wrong dimension");
    w.u32(static_cast<std::uint32_t>(key.size()));
    w.bytes(key);
    for (float x : vec.values) w.f32(x);
  }
  return w.take();
}

EmbeddingTable decode_embeddings(std::string_view bytes) {
  ByteReader r(bytes, "CBRE");
  if (bytes.size() < 4 || r.bytes(4) != kMagic) throw_error(ErrorKind::kFormat, "CBRE: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw_error(ErrorKind::kFormat, "CBRE: unsupported version " + std::to_string(version));
  }
  EmbeddingTable table;
  table.dim = r.u32();
  const std::uint64_t count = r.u64();
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint32_t key_len = r.u32();
    std::string key(r.bytes(key_len));
    EmbeddingVector v;
    v.values.resize(table.dim);
    for (auto& x : v.values) {
      x = r.f32();
      if (!std::isfinite(x)) {
        throw_error(ErrorKind::kFormat, "CBRE: non-finite value in record " + std::to_string(i) +
                                            " near offset " + std::to_string(r.offset()));
      }
    }
    const double n = v.norm();
    if (n != 0.0 && std::abs(n - 1.0) > 1e-3) normalize(v);
    if (!table.entries.emplace(std::move(key), std::move(v)).second) {
      throw_error(ErrorKind::kFormat, "CBRE: duplicate key in record " + std::to_string(i));
    }
  }
  if (r.remaining() != 0) {
    throw_error(ErrorKind::kFormat, "CBRE: " + std::to_string(r.remaining()) +
                                        " trailing bytes at offset " + std::to_string(r.offset()));
  }
  return table;
}

void store_embeddings(const std::filesystem::path& path, const EmbeddingTable& table) {
  write_file(path, encode_embeddings(table));
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  return decode_embeddings(read_file(path));
}

HashEmbedder::HashEmbedder(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  require(dim >= 8, "HashEmbedder: dim must be >= 8");
}

EmbeddingVector HashEmbedder::embed(const MaskedQuestion& question) const {
  return hash_embed(question, dim_, seed_);
}

std::string HashEmbedder::name() const {
  return "hash:" + std::to_string(dim_) + ":" + std::to_string(seed_);
}

TableEmbedder::TableEmbedder(EmbeddingTable table) : table_(std::move(table)) {}

EmbeddingVector TableEmbedder::embed(const MaskedQuestion& question) const {
  const std::string key = question.text();
  auto it = table_.entries.find(key);
  if (it == table_.entries.end()) {
    throw_error(ErrorKind::kNotFound, "no precomputed embedding for '" + key + "'");
  }
  return it->second;
}

std::unique_ptr<Embedder> make_embedder(std::string_view descriptor) {
  if (descriptor.starts_with("file:")) {
    return std::make_unique<TableEmbedder>(load_embeddings(std::string(descriptor.substr(5))));
  }
  const auto parts = split(descriptor, ':');
  if (parts[0] != "hash" || parts.size() > 3) {
    throw_error(ErrorKind::kConfig, "unknown embedder '" + std::string(descriptor) + "'");
  }
  try {
    const int dim = parts.size() > 1 ? std::stoi(std::string(parts[1])) : 256;
    const std::uint64_t seed = parts.size() > 2 ? std::stoull(std::string(parts[2])) : 17;
    if (dim < 8) throw_error(ErrorKind::kConfig, "embedder dim must be >= 8");
    return std::make_unique<HashEmbedder>(dim, seed);
  } catch (const std::invalid_argument&) {
    throw_error(ErrorKind::kConfig, "bad embedder '" + std::string(descriptor) + "'");
  }
}

}  // namespace cbr
