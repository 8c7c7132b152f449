// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cbrikb/kbc.hpp"
#include "cbrikb/kg.hpp"
#include "cbrikb/qa.hpp"

namespace cbr {

enum class DropScheme { kGlobal, kPerQuestion };

std::string_view to_string(DropScheme scheme);

/// Which symbolic triples an incomplete-KB run removes, and why.
struct DropPlan {
  DropScheme scheme = DropScheme::kGlobal;
  double parameter = 0.0;  // fraction (global) or p (per question)
  std::uint64_t seed = 0;
  std::vector<NamedTriple> dropped;    // sorted
  std::vector<std::string> affected;   // example ids, sorted
  std::size_t skipped = 0;             // examples without a gold chain

  /// Canonical text form; identical plans give identical bytes.
  std::string to_text() const;
  static DropPlan parse(std::string_view text);
  friend bool operator==(const DropPlan&, const DropPlan&) = default;
};

struct DropResult {
  DropPlan plan;
  KnowledgeGraph reduced;
};

/// Removes floor(fraction * |symbolic triples|) triples sampled uniformly
/// without replacement. An example is affected when a triple on one of its
/// gold-chain paths is removed.
DropResult drop_global(const KnowledgeGraph& kg, double fraction, std::uint64_t seed,
                       std::span<const QaExample> examples = {});

/// With probability p per example, picks one distinct gold-chain relation
/// and removes every triple of it inside the example's 2-hop sub-KB.
/// Deletions are unioned and applied once.
DropResult drop_per_question(const KnowledgeGraph& kg, std::span<const QaExample> examples, double p,
                             std::uint64_t seed);

/// Symbolic triples supporting the gold chain's execution from the
/// example's query entities.
std::vector<Triple> gold_support(const KnowledgeGraph& kg, const QaExample& example);

KnowledgeGraph apply_plan(const KnowledgeGraph& kg, const DropPlan& plan);

}  // namespace cbr
