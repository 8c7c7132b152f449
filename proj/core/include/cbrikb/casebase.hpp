// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cbrikb/chain.hpp"
#include "cbrikb/embed.hpp"
#include "cbrikb/kg.hpp"
#include "cbrikb/qa.hpp"

namespace cbr {

struct MiningOptions {
  int max_len = 4;
  bool include_text = true;  // --mine-with-text
  bool forward_only = false;
};

struct MiningResult {
  std::vector<InferentialChain> chains;  // sorted, unique
  std::size_t skipped_entities = 0;      // names absent from the graph
};

/// Union of the inferential chains of all shortest e_q -> e_a paths.
/// Throws kUnminable when no query entity and no answer is in the graph.
MiningResult mine_chains(const KnowledgeGraph& kg, std::span<const std::string> query_entities,
                         std::span<const std::string> answers, const MiningOptions& options = {});

struct ChainScore {
  double local_f1 = 0.0;
  double global_f1 = 0.0;
  friend bool operator==(const ChainScore&, const ChainScore&) = default;
};

struct Case {
  std::string case_id;
  MaskedQuestion question;
  EmbeddingVector embedding;
  std::vector<std::string> query_entities;  // E_q, sorted unique
  std::vector<std::string> gold_answers;    // E_a, sorted unique
  std::vector<InferentialChain> chains;     // P, sorted unique
  /// Parallel to chains once revised.
  std::optional<std::vector<ChainScore>> chain_scores;

  bool chainless() const { return chains.empty(); }
};

class CaseBase {
 public:
  explicit CaseBase(int dim = 0) : dim_(dim) {}

  int dim() const { return dim_; }
  std::size_t size() const { return cases_.size(); }
  bool empty() const { return cases_.empty(); }
  const std::vector<Case>& cases() const { return cases_; }
  const Case& at(std::size_t i) const { return cases_.at(i); }
  const Case* find(std::string_view case_id) const;

  /// Throws kContract on dimension mismatch or duplicate id.
  void add(Case c);

  friend bool operator==(const CaseBase& a, const CaseBase& b);

 private:
  int dim_;
  std::vector<Case> cases_;
  std::vector<std::string> ids_;  // sorted, for duplicate detection
};

bool operator==(const Case& a, const Case& b);

struct CaseOptions {
  MiningOptions mining;
  MaskMode mask_mode = MaskMode::kPerToken;
};

/// Throws kInput when the question carries no bracketed mention.
Case build_case(std::string case_id, std::string_view raw_question,
                std::span<const std::string> answers, const KnowledgeGraph& kg,
                const Embedder& embedder, const CaseOptions& options = {});

struct BuildConfig {
  CaseOptions case_options;
  std::string id_prefix = "c";
  unsigned workers = 1;
};

struct BuildReport {
  std::size_t cases = 0;
  std::size_t chainless = 0;
  std::size_t skipped = 0;  // questions without mentions
  std::size_t unminable = 0;
  double mean_chains = 0.0;
};

struct BuildResult {
  CaseBase casebase;
  BuildReport report;
};

BuildResult build_casebase(std::span<const QaExample> examples, const KnowledgeGraph& kg,
                           const Embedder& embedder, const BuildConfig& config = {});
BuildResult build_casebase(const std::filesystem::path& train_file, const KnowledgeGraph& kg,
                           const Embedder& embedder, const BuildConfig& config = {});

/// Binary container: "CBRB", u32 version, u64 length + CBRE block keyed by
/// case id, u64 length + chain section with one line per case:
/// case_id<TAB>E_q<TAB>E_a<TAB>chain1;chain2<TAB>question<TAB>scores
std::string encode_casebase(const CaseBase& casebase);
CaseBase decode_casebase(std::string_view bytes);
void store_casebase(const std::filesystem::path& path, const CaseBase& casebase);
CaseBase load_casebase(const std::filesystem::path& path);

}  // namespace cbr
