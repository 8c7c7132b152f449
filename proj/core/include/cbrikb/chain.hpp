// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include "cbrikb/kg.hpp"

namespace cbr {

struct ChainStep {
  RelationLabel label;
  Direction direction = Direction::kForward;
  friend auto operator<=>(const ChainStep&, const ChainStep&) = default;
};

/// Relation-only view of a reasoning chain; the unit a case stores and
/// reuses. Text form: comma-separated steps, `@` marks a document label and
/// `^-1` an inverse traversal, e.g. `written_by^-1,directed_by`.
struct InferentialChain {
  std::vector<ChainStep> steps;

  std::size_t hops() const { return steps.size(); }
  std::string to_string() const;
  static InferentialChain parse(std::string_view text);

  friend auto operator<=>(const InferentialChain&, const InferentialChain&) = default;
};

/// Position of `entity` among the document's distinct mentions, in mention
/// order; the distinct-mention count when absent.
std::size_t mention_rank(const Document& doc, std::string_view entity);

/// Free-form steps are marked inverse when traversed from the document's
/// later-mentioned entity to its earlier one.
InferentialChain to_inferential(const KnowledgeGraph& kg, const ReasoningChain& chain);

/// Entities reached by walking the chain's literal edges from `sources`
/// (no completion, no alignment). Steps whose label the graph lacks reach
/// nothing.
std::vector<EntityId> execute_exact(const KnowledgeGraph& kg, std::span<const EntityId> sources,
                                    const InferentialChain& chain);

}  // namespace cbr
