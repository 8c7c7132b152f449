// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include "cbrikb/chain.hpp"

#include <algorithm>

#include "cbrikb/error.hpp"
#include "cbrikb/text.hpp"

namespace cbr {

std::size_t mention_rank(const Document& doc, std::string_view entity) {
  std::vector<std::string_view> seen;
  for (const auto& m : doc.mentions) {
    if (std::find(seen.begin(), seen.end(), m.entity) != seen.end()) continue;
    if (m.entity == entity) return seen.size();
    seen.push_back(m.entity);
  }
  return seen.size();
}

std::string InferentialChain::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i) out += ',';
    if (steps[i].label.kind == RelationKind::kFreeForm) out += '@';
    out += steps[i].label.name;
    out += direction_suffix(steps[i].direction);
  }
  return out;
}

InferentialChain InferentialChain::parse(std::string_view text) {
  InferentialChain chain;
  if (trim(text).empty()) return chain;
  for (std::string_view part : split(text, ',')) {
    part = trim(part);
    ChainStep step;
    if (part.ends_with("^-1")) {
      step.direction = Direction::kInverse;
      part.remove_suffix(3);
    }
    if (part.starts_with('@')) {
      step.label.kind = RelationKind::kFreeForm;
      part.remove_prefix(1);
    }
    if (part.empty()) {
      throw_error(ErrorKind::kParse, "empty step in chain '" + std::string(text) + "'");
    }
    step.label.name = std::string(part);
    chain.steps.push_back(std::move(step));
  }
  return chain;
}

InferentialChain to_inferential(const KnowledgeGraph& kg, const ReasoningChain& chain) {
  InferentialChain out;
  out.steps.reserve(chain.edges.size());
  for (std::size_t i = 0; i < chain.edges.size(); ++i) {
    ChainStep step{kg.label(chain.edges[i]), chain.directions[i]};
    if (chain.edges[i].kind == RelationKind::kFreeForm) {
      // Text edges exist in both orders; the recorded direction is relative
      // to the document's mention order (earlier mention = subject).
      const Document& doc = kg.document(chain.edges[i].id);
      const std::string& from = kg.entity_name(chain.nodes[i]);
      const std::string& to = kg.entity_name(chain.nodes[i + 1]);
      step.direction = mention_rank(doc, from) <= mention_rank(doc, to) ? Direction::kForward
                                                                        : Direction::kInverse;
    }
    out.steps.push_back(std::move(step));
  }
  return out;
}

std::vector<EntityId> execute_exact(const KnowledgeGraph& kg, std::span<const EntityId> sources,
                                    const InferentialChain& chain) {
  std::vector<EntityId> frontier;
  for (EntityId e : sources) {
    if (kg.has_entity(e)) frontier.push_back(e);
  }
  for (const auto& step : chain.steps) {
    const auto ref = kg.resolve(step.label);
    if (!ref) return {};
    std::vector<EntityId> next;
    for (EntityId e : frontier) {
      const auto edges = step.direction == Direction::kForward ? kg.out_edges(e) : kg.in_edges(e);
      for (const auto& edge : edges) {
        if (edge.relation == *ref) next.push_back(edge.other);
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    frontier = std::move(next);
    if (frontier.empty()) break;
  }
  return frontier;
}

}  // namespace cbr
