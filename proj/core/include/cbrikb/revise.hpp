// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#pragma once

#include <span>
#include <string>
#include <vector>

#include "cbrikb/casebase.hpp"
#include "cbrikb/embed.hpp"
#include "cbrikb/kg.hpp"
#include "cbrikb/qa.hpp"

namespace cbr {

/// Harmonic mean of precision and recall; 0 for an empty prediction.
/// Throws kContract on an empty gold set.
double f1(std::span<const std::string> predicted, std::span<const std::string> gold);

/// Names reached by executing the chain literally from `sources`, minus the
/// sources themselves.
std::vector<std::string> execute_names(const KnowledgeGraph& kg, std::span<const std::string> sources,
                                       const InferentialChain& chain);

/// F1 of the chain's literal execution from the case's query entities.
double local_f1(const InferentialChain& chain, const Case& owner, const KnowledgeGraph& kg);

/// Held-out questions embedded once for neighbor lookups.
struct DevSet {
  CaseBase questions;  // chainless cases; gold answers filled in
};

DevSet make_dev_set(std::span<const QaExample> examples, const Embedder& embedder,
                    MaskMode mask_mode = MaskMode::kPerToken);

/// Mean F1 of the chain over the owner's k nearest dev questions (0 when
/// none is retrievable).
double global_f1(const InferentialChain& chain, const Case& owner, const DevSet& dev,
                 const KnowledgeGraph& kg, int neighbor_k);

enum class ThresholdOn { kLocal, kGlobal };

struct ReviseConfig {
  double discard_threshold = 0.1;
  int max_chains_per_case = 5;
  int neighbor_k = 5;
  ThresholdOn threshold_on = ThresholdOn::kLocal;
  unsigned workers = 1;
};

struct ChainVerdict {
  std::string case_id;
  InferentialChain chain;
  double local_f1 = 0.0;
  double global_f1 = 0.0;
  bool retained = false;
};

struct ReviseReport {
  std::vector<ChainVerdict> verdicts;  // case order, then rank order
  std::size_t chains_before = 0;
  std::size_t chains_discarded = 0;
  std::size_t cases_discarded = 0;

  /// One line per verdict: case_id, chain, local, global, keep|drop.
  std::string to_text() const;
};

struct ReviseResult {
  CaseBase casebase;
  ReviseReport report;
};

/// Ranks each case's chains by (local desc, global desc, text asc), drops
/// those under the threshold, keeps the top max_chains_per_case, and drops
/// cases left without chains. Cases that had no chains pass through.
ReviseResult revise_and_retain(const CaseBase& casebase, const DevSet& dev, const KnowledgeGraph& kg,
                               const ReviseConfig& config = {});

}  // namespace cbr
