// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "cbrikb/casebase.hpp"
#include "cbrikb/chain.hpp"
#include "cbrikb/embed.hpp"
#include "cbrikb/kbc.hpp"
#include "cbrikb/kg.hpp"
#include "cbrikb/realign.hpp"
#include "cbrikb/retrieve.hpp"

namespace cbr {

struct BeamConfig {
  int beam_width = 32;
  double kbc_threshold = 0.5;
  int kbc_topm = 10;
  int max_results = 10;
  bool use_text = true;
  bool use_kbc = true;
  bool use_kb = true;  // exact-match branch; off only for the text-only ablation
  /// Minimum sub-KB radius; widened to the longest retrieved chain.
  int subkb_hops = 2;
};

enum class StepSource { kNone, kExactMatch, kKbc, kTextSupport, kFreeFormAlign };

std::string_view to_string(StepSource source);

struct StepScore {
  double value = 0.0;
  StepSource source = StepSource::kNone;
};

/// Optional scoring models; a null pointer disables the matching branch.
struct ReasoningModels {
  const ComplExModel* kbc = nullptr;
  const ReAligner* aligner = nullptr;
};

/// Throws kContract when a branch is enabled without its model, or on
/// out-of-range numbers.
void validate(const BeamConfig& config, const ReasoningModels& models);

/// Best path reaching one entity.
struct PathTrace {
  double score = 0.0;
  std::vector<EntityId> nodes;       // e_0 ... e_n
  std::vector<StepSource> sources;   // one per step
};

using PathScores = std::map<EntityId, PathTrace>;

struct Provenance {
  std::string case_id;
  std::string chain;
  double path_score = 0.0;
  std::vector<StepSource> sources;
  std::vector<std::string> path;  // entity names along the best path
};

struct AnswerEntry {
  std::string entity;
  double score = 0.0;
  std::vector<Provenance> provenance;
};

struct ScoredAnswerSet {
  /// Every reached entity, query entities included.
  std::map<std::string, AnswerEntry> answers;
  /// Score desc, name asc; query entities left out unless nothing else remains.
  std::vector<std::string> ranking;

  bool abstained() const { return ranking.empty(); }
  double score_of(std::string_view entity) const;
};

/// Soft chain execution. The exact branch reads `kg`; text evidence comes
/// from the graph passed to each call (normally the question's sub-KB).
/// Safe for concurrent use; KBC predictions are cached.
class Reasoner {
 public:
  Reasoner(const KnowledgeGraph& kg, BeamConfig config, ReasoningModels models);

  const BeamConfig& config() const { return config_; }
  const KnowledgeGraph& kg() const { return kg_; }

  /// Score of traversing symbolic `relation` from `from` to `to` in
  /// `direction`: 1 for a literal triple, else the larger of the calibrated
  /// KBC probability and the best text support in `text_kb`.
  StepScore step_score(const KnowledgeGraph& text_kb, EntityId from, std::string_view relation,
                       Direction direction, EntityId to) const;

  /// Symbolic relation whose proxy text agrees best with the document.
  /// Throws kConfig without an aligner.
  Alignment align_free_form(const Document& doc) const;

  PathScores follow_chain(const KnowledgeGraph& text_kb, std::span<const EntityId> sources,
                          const InferentialChain& chain) const;

  ScoredAnswerSet vote(std::span<const RetrievedNeighbor> neighbors, const KnowledgeGraph& text_kb,
                       std::span<const EntityId> sources) const;

 private:
  struct Candidate {
    EntityId entity;
    double value;
    StepSource source;
  };
  std::vector<Candidate> expand(const KnowledgeGraph& text_kb, EntityId from,
                                std::string_view relation, Direction direction) const;
  const std::vector<ScoredEntity>& kbc_proposals(EntityId from, std::string_view relation,
                                                 Direction direction) const;
  double kbc_probability(EntityId from, std::string_view relation, Direction direction,
                         EntityId to) const;
  double text_support(const KnowledgeGraph& text_kb, EntityId from, std::string_view relation,
                      Direction direction, EntityId to) const;

  const KnowledgeGraph& kg_;
  BeamConfig config_;
  ReasoningModels models_;
  mutable std::mutex mu_;
  mutable std::map<std::tuple<std::uint32_t, std::string, Direction>, std::vector<ScoredEntity>,
                   std::less<>>
      kbc_cache_;
};

struct NeighborSummary {
  std::string case_id;
  std::string question;
  double similarity = 0.0;
  std::vector<std::string> chains;
};

struct Explanation {
  std::string masked_question;
  std::vector<std::string> query_entities;  // found in the graph
  std::vector<std::string> missing_entities;
  std::vector<NeighborSummary> neighbors;
  std::size_t subkb_entities = 0;

  /// Structured text: neighbors, chains, then one line per (answer, provenance).
  std::string to_text(const ScoredAnswerSet& answers, std::size_t max_answers) const;
};

struct AnswerResult {
  ScoredAnswerSet answers;
  Explanation explanation;
};

/// Full reuse step for one question: mask, embed, retrieve, carve the sub-KB
/// around the query entities, vote. Throws kInput without a mention.
AnswerResult answer(std::string_view raw_question, const CaseBase& casebase,
                    const Embedder& embedder, const RetrievalConfig& retrieval,
                    const Reasoner& reasoner, MaskMode mask_mode = MaskMode::kPerToken);

}  // namespace cbr
