// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include "cbrikb/reason.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include "cbrikb/error.hpp"
#include "cbrikb/text.hpp"

namespace cbr {

namespace {

std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string join_sources(const std::vector<StepSource>& sources) {
  std::string out;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (i) out += ',';
    out += to_string(sources[i]);
  }
  return out;
}

}  // namespace

std::string_view to_string(StepSource source) {
  switch (source) {
    case StepSource::kNone: return "none";
    case StepSource::kExactMatch: return "exact";
    case StepSource::kKbc: return "kbc";
    case StepSource::kTextSupport: return "text";
    case StepSource::kFreeFormAlign: return "align";
  }
  return "none";
}

double ScoredAnswerSet::score_of(std::string_view entity) const {
  auto it = answers.find(std::string(entity));
  return it == answers.end() ? 0.0 : it->second.score;
}

void validate(const BeamConfig& config, const ReasoningModels& models) {
  require(config.beam_width >= 1, "beam width must be >= 1");
  require(config.kbc_topm >= 1, "kbc top-m must be >= 1");
  require(config.kbc_threshold >= 0.0 && config.kbc_threshold <= 1.0,
          "kbc threshold must lie in [0, 1]");
  require(config.subkb_hops >= 1, "sub-KB hops must be >= 1");
  require(!config.use_kbc || models.kbc != nullptr, "KBC branch enabled without a KBC model");
  require(!config.use_text || models.aligner != nullptr, "text branch enabled without proxy texts");
}

Reasoner::Reasoner(const KnowledgeGraph& kg, BeamConfig config, ReasoningModels models)
    : kg_(kg), config_(config), models_(models) {
  validate(config_, models_);
}

double Reasoner::kbc_probability(EntityId from, std::string_view relation, Direction direction,
                                 EntityId to) const {
  const ComplExModel& m = *models_.kbc;
  const auto r = m.relation_index(relation);
  const auto a = m.entity_index(kg_.entity_name(from));
  const auto b = m.entity_index(kg_.entity_name(to));
  if (!r || !a || !b) return 0.0;
  // Inverse steps score the forward triple (to, r, from).
  return direction == Direction::kForward ? m.prob(*a, *r, *b) : m.prob(*b, *r, *a);
}

double Reasoner::text_support(const KnowledgeGraph& text_kb, EntityId from,
                              std::string_view relation, Direction direction, EntityId to) const {
  if (!text_kb.has_entity(from) || !models_.aligner->proxies().texts.contains(std::string(relation))) {
    return 0.0;
  }
  const std::string& a = kg_.entity_name(from);
  const std::string& b = kg_.entity_name(to);
  double best = 0.0;
  for (const auto& edge : text_kb.out_edges(from)) {
    if (edge.relation.kind != RelationKind::kFreeForm || edge.other != to) continue;
    const Document& doc = text_kb.document(edge.relation.id);
    const double s = direction == Direction::kForward
                         ? models_.aligner->support(doc, a, b, relation)
                         : models_.aligner->support(doc, b, a, relation);
    best = std::max(best, s);
  }
  return best;
}

StepScore Reasoner::step_score(const KnowledgeGraph& text_kb, EntityId from,
                               std::string_view relation, Direction direction, EntityId to) const {
  if (config_.use_kb) {
    if (auto r = kg_.find_relation(relation)) {
      const RelationRef ref{RelationKind::kSymbolic, *r};
      const Triple t = direction == Direction::kForward ? Triple{from, ref, to} : Triple{to, ref, from};
      if (kg_.contains(t)) return {1.0, StepSource::kExactMatch};
    }
  }
  StepScore best;
  if (config_.use_kbc) {
    const double p = kbc_probability(from, relation, direction, to);
    if (p > best.value) best = {p, StepSource::kKbc};
  }
  if (config_.use_text) {
    const double p = text_support(text_kb, from, relation, direction, to);
    if (p > best.value) best = {p, StepSource::kTextSupport};
  }
  return best;
}

Alignment Reasoner::align_free_form(const Document& doc) const {
  if (models_.aligner == nullptr) throw_error(ErrorKind::kConfig, "free-form alignment needs proxy texts");
  return models_.aligner->align(doc);
}

const std::vector<ScoredEntity>& Reasoner::kbc_proposals(EntityId from, std::string_view relation,
                                                         Direction direction) const {
  auto key = std::make_tuple(from.value, std::string(relation), direction);
  {
    std::lock_guard lock(mu_);
    if (auto it = kbc_cache_.find(key); it != kbc_cache_.end()) return it->second;
  }
  const ComplExModel& m = *models_.kbc;
  std::vector<ScoredEntity> found;
  const std::string& name = kg_.entity_name(from);
  if (m.entity_index(name) && m.relation_index(relation)) {
    found = direction == Direction::kForward
                ? predict_objects(m, name, relation, config_.kbc_topm, config_.kbc_threshold)
                : predict_subjects(m, name, relation, config_.kbc_topm, config_.kbc_threshold);
  }
  std::lock_guard lock(mu_);
  return kbc_cache_.emplace(std::move(key), std::move(found)).first->second;
}

std::vector<Reasoner::Candidate> Reasoner::expand(const KnowledgeGraph& text_kb, EntityId from,
                                                  std::string_view relation,
                                                  Direction direction) const {
  std::vector<Candidate> out;
  std::vector<EntityId> exact;
  if (config_.use_kb && kg_.has_entity(from)) {
    if (auto r = kg_.find_relation(relation)) {
      const RelationRef ref{RelationKind::kSymbolic, *r};
      for (const auto& e : direction == Direction::kForward ? kg_.out_edges(from) : kg_.in_edges(from)) {
        if (e.relation == ref) exact.push_back(e.other);
      }
    }
  }
  std::sort(exact.begin(), exact.end());
  exact.erase(std::unique(exact.begin(), exact.end()), exact.end());
  for (EntityId e : exact) out.push_back({e, 1.0, StepSource::kExactMatch});

  // Soft branches only propose; each proposal gets the full step score.
  std::vector<EntityId> proposed;
  if (config_.use_text && text_kb.has_entity(from)) {
    for (const auto& e : text_kb.out_edges(from)) {
      if (e.relation.kind == RelationKind::kFreeForm) proposed.push_back(e.other);
    }
  }
  if (config_.use_kbc) {
    for (const auto& [name, prob] : kbc_proposals(from, relation, direction)) {
      if (auto e = kg_.find_entity(name)) proposed.push_back(*e);
    }
  }
  std::sort(proposed.begin(), proposed.end());
  proposed.erase(std::unique(proposed.begin(), proposed.end()), proposed.end());
  for (EntityId e : proposed) {
    if (std::binary_search(exact.begin(), exact.end(), e)) continue;
    const StepScore s = step_score(text_kb, from, relation, direction, e);
    if (s.value > 0.0) out.push_back({e, s.value, s.source});
  }
  return out;
}

PathScores Reasoner::follow_chain(const KnowledgeGraph& text_kb, std::span<const EntityId> sources,
                                  const InferentialChain& chain) const {
  std::vector<std::pair<EntityId, PathTrace>> frontier;
  {
    std::vector<EntityId> start(sources.begin(), sources.end());
    std::sort(start.begin(), start.end());
    start.erase(std::unique(start.begin(), start.end()), start.end());
    for (EntityId e : start) {
      if (kg_.has_entity(e)) frontier.push_back({e, PathTrace{1.0, {e}, {}}});
    }
  }
  if (chain.steps.empty()) return {};

  for (const auto& step : chain.steps) {
    std::string relation = step.label.name;
    double multiplier = 1.0;
    bool aligned = false;
    if (step.label.kind == RelationKind::kFreeForm) {
      const Document* doc = kg_.find_document(step.label.name);
      if (doc == nullptr || !config_.use_text) return {};
      const Alignment a = align_free_form(*doc);
      if (a.probability <= 0.0) return {};
      relation = a.relation;
      multiplier = a.probability;
      aligned = true;
    }
    std::map<EntityId, PathTrace> next;
    for (const auto& [entity, trace] : frontier) {
      for (const Candidate& c : expand(text_kb, entity, relation, step.direction)) {
        const double score = trace.score * c.value * multiplier;
        auto it = next.find(c.entity);
        if (it != next.end() && it->second.score >= score) continue;
        PathTrace t = trace;
        t.score = score;
        t.nodes.push_back(c.entity);
        t.sources.push_back(aligned ? StepSource::kFreeFormAlign : c.source);
        next.insert_or_assign(c.entity, std::move(t));
      }
    }
    frontier.assign(std::make_move_iterator(next.begin()), std::make_move_iterator(next.end()));
    std::stable_sort(frontier.begin(), frontier.end(), [&](const auto& a, const auto& b) {
      if (a.second.score != b.second.score) return a.second.score > b.second.score;
      return kg_.entity_name(a.first) < kg_.entity_name(b.first);
    });
    if (frontier.size() > static_cast<std::size_t>(config_.beam_width)) {
      frontier.resize(static_cast<std::size_t>(config_.beam_width));
    }
    if (frontier.empty()) return {};
  }
  return PathScores(std::make_move_iterator(frontier.begin()), std::make_move_iterator(frontier.end()));
}

ScoredAnswerSet Reasoner::vote(std::span<const RetrievedNeighbor> neighbors,
                               const KnowledgeGraph& text_kb,
                               std::span<const EntityId> sources) const {
  ScoredAnswerSet result;
  std::unordered_map<std::string, PathScores> memo;
  for (const auto& n : neighbors) {
    const Case& c = *n.case_ptr;
    // Per case: best chain per entity, first chain wins ties.
    std::map<EntityId, std::pair<const InferentialChain*, const PathTrace*>> best;
    for (const auto& chain : c.chains) {
      const std::string key = chain.to_string();
      auto it = memo.find(key);
      if (it == memo.end()) it = memo.emplace(key, follow_chain(text_kb, sources, chain)).first;
      for (const auto& [entity, trace] : it->second) {
        auto b = best.find(entity);
        if (b == best.end() || trace.score > b->second.second->score) {
          best.insert_or_assign(entity, std::make_pair(&chain, &trace));
        }
      }
    }
    for (const auto& [entity, pick] : best) {
      const std::string& name = kg_.entity_name(entity);
      AnswerEntry& entry = result.answers[name];
      entry.entity = name;
      entry.score += pick.second->score;
      Provenance p;
      p.case_id = c.case_id;
      p.chain = pick.first->to_string();
      p.path_score = pick.second->score;
      p.sources = pick.second->sources;
      for (EntityId e : pick.second->nodes) p.path.push_back(kg_.entity_name(e));
      entry.provenance.push_back(std::move(p));
    }
  }

  std::vector<std::string> query_names;
  for (EntityId e : sources) {
    if (kg_.has_entity(e)) query_names.push_back(kg_.entity_name(e));
  }
  std::vector<const AnswerEntry*> ranked;
  for (const auto& [name, entry] : result.answers) {
    if (std::find(query_names.begin(), query_names.end(), name) == query_names.end()) {
      ranked.push_back(&entry);
    }
  }
  if (ranked.empty()) {
    for (const auto& [name, entry] : result.answers) ranked.push_back(&entry);
  }
  std::sort(ranked.begin(), ranked.end(), [](const AnswerEntry* a, const AnswerEntry* b) {
    if (a->score != b->score) return a->score > b->score;
    return a->entity < b->entity;
  });
  if (config_.max_results > 0 && ranked.size() > static_cast<std::size_t>(config_.max_results)) {
    ranked.resize(static_cast<std::size_t>(config_.max_results));
  }
  for (const AnswerEntry* e : ranked) result.ranking.push_back(e->entity);
  return result;
}

std::string Explanation::to_text(const ScoredAnswerSet& answers, std::size_t max_answers) const {
  std::ostringstream out;
  out << "question\t" << masked_question << '\n';
  out << "entities\t" << join(query_entities, "|");
  if (!missing_entities.empty()) out << "\tmissing\t" << join(missing_entities, "|");
  out << '\n';
  out << "subkb\t" << subkb_entities << '\n';
  for (const auto& n : neighbors) {
    out << "neighbor\t" << n.case_id << '\t' << format_score(n.similarity) << '\t' << n.question
        << '\t' << join(n.chains, ";") << '\n';
  }
  if (answers.abstained()) {
    out << "abstain\n";
    return out.str();
  }
  std::size_t rank = 0;
  for (const auto& name : answers.ranking) {
    if (rank++ >= max_answers) break;
    const AnswerEntry& e = answers.answers.at(name);
    for (const auto& p : e.provenance) {
      out << "answer\t" << rank << '\t' << name << '\t' << format_score(e.score) << '\t' << p.case_id
          << '\t' << p.chain << '\t' << format_score(p.path_score) << '\t' << join_sources(p.sources)
          << '\t' << join(p.path, ">") << '\n';
    }
  }
  return out.str();
}

AnswerResult answer(std::string_view raw_question, const CaseBase& casebase,
                    const Embedder& embedder, const RetrievalConfig& retrieval,
                    const Reasoner& reasoner, MaskMode mask_mode) {
  const MaskedQuestion q = mask_question(raw_question, mask_mode);
  if (q.mention_count == 0) {
    throw_error(ErrorKind::kInput, "question has no [bracketed] mention: " + std::string(raw_question));
  }
  const KnowledgeGraph& kg = reasoner.kg();
  AnswerResult result;
  Explanation& ex = result.explanation;
  ex.masked_question = q.text();

  std::vector<std::string> mentions = q.mentions;
  std::sort(mentions.begin(), mentions.end());
  mentions.erase(std::unique(mentions.begin(), mentions.end()), mentions.end());
  std::vector<EntityId> sources;
  for (const auto& m : mentions) {
    if (auto e = kg.find_entity(m)) {
      sources.push_back(*e);
      ex.query_entities.push_back(m);
    } else {
      ex.missing_entities.push_back(m);
    }
  }
  if (casebase.empty() || sources.empty()) return result;

  const auto neighbors = knn(casebase, embedder.embed(q), retrieval);
  int hops = reasoner.config().subkb_hops;
  for (const auto& n : neighbors) {
    NeighborSummary s{n.case_ptr->case_id, n.case_ptr->question.raw, n.similarity, {}};
    for (const auto& c : n.case_ptr->chains) {
      s.chains.push_back(c.to_string());
      hops = std::max(hops, static_cast<int>(c.hops()));
    }
    ex.neighbors.push_back(std::move(s));
  }
  const KnowledgeGraph sub = kg.subkb(sources, hops);
  ex.subkb_entities = sub.entity_count();
  result.answers = reasoner.vote(neighbors, sub, sources);
  return result;
}

}  // namespace cbr
