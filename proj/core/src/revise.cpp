// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include "cbrikb/revise.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <sstream>
#include <thread>

#include "cbrikb/error.hpp"
#include "cbrikb/retrieve.hpp"

namespace cbr {

double f1(std::span<const std::string> predicted, std::span<const std::string> gold) {
  require(!gold.empty(), "f1: empty gold set");
  if (predicted.empty()) return 0.0;
  std::vector<std::string> p(predicted.begin(), predicted.end());
  std::vector<std::string> g(gold.begin(), gold.end());
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  std::vector<std::string> both;
  std::set_intersection(p.begin(), p.end(), g.begin(), g.end(), std::back_inserter(both));
  if (both.empty()) return 0.0;
  const double precision = static_cast<double>(both.size()) / static_cast<double>(p.size());
  const double recall = static_cast<double>(both.size()) / static_cast<double>(g.size());
  return 2.0 * precision * recall / (precision + recall);
}

std::vector<std::string> execute_names(const KnowledgeGraph& kg, std::span<const std::string> sources,
                                       const InferentialChain& chain) {
  std::vector<EntityId> ids;
  for (const auto& s : sources) {
    if (auto e = kg.find_entity(s)) ids.push_back(*e);
  }
  std::vector<std::string> out;
  for (EntityId e : execute_exact(kg, ids, chain)) {
    if (std::find(ids.begin(), ids.end(), e) == ids.end()) out.push_back(kg.entity_name(e));
  }
  std::sort(out.begin(), out.end());
  return out;
}

double local_f1(const InferentialChain& chain, const Case& owner, const KnowledgeGraph& kg) {
  if (owner.gold_answers.empty()) return 0.0;
  return f1(execute_names(kg, owner.query_entities, chain), owner.gold_answers);
}

DevSet make_dev_set(std::span<const QaExample> examples, const Embedder& embedder, MaskMode mask_mode) {
  DevSet dev{CaseBase(embedder.dim())};
  for (const auto& ex : examples) {
    Case c;
    c.case_id = "d" + ex.id;
    c.question = mask_question(ex.raw_question, mask_mode);
    c.embedding = embedder.embed(c.question);
    c.query_entities = c.question.mentions;
    std::sort(c.query_entities.begin(), c.query_entities.end());
    c.query_entities.erase(std::unique(c.query_entities.begin(), c.query_entities.end()),
                           c.query_entities.end());
    c.gold_answers = ex.answers;
    std::sort(c.gold_answers.begin(), c.gold_answers.end());
    c.gold_answers.erase(std::unique(c.gold_answers.begin(), c.gold_answers.end()), c.gold_answers.end());
    dev.questions.add(std::move(c));
  }
  return dev;
}

double global_f1(const InferentialChain& chain, const Case& owner, const DevSet& dev,
                 const KnowledgeGraph& kg, int neighbor_k) {
  if (dev.questions.empty() || neighbor_k < 1) return 0.0;
  RetrievalConfig rc;
  rc.k = neighbor_k;
  const auto hits = knn(dev.questions, owner.embedding, rc);
  if (hits.empty()) return 0.0;
  double total = 0.0;
  for (const auto& h : hits) total += local_f1(chain, *h.case_ptr, kg);
  return total / static_cast<double>(hits.size());
}

std::string ReviseReport::to_text() const {
  std::ostringstream out;
  char buf[64];
  for (const auto& v : verdicts) {
    std::snprintf(buf, sizeof buf, "%.6f\t%.6f", v.local_f1, v.global_f1);
    out << v.case_id << '\t' << v.chain.to_string() << '\t' << buf << '\t'
        << (v.retained ? "keep" : "drop") << '\n';
  }
  return out.str();
}

ReviseResult revise_and_retain(const CaseBase& casebase, const DevSet& dev, const KnowledgeGraph& kg,
                               const ReviseConfig& config) {
  require(config.discard_threshold >= 0.0 && config.discard_threshold <= 1.0,
          "revise: threshold must lie in [0, 1]");
  require(config.max_chains_per_case >= 1, "revise: max chains per case must be >= 1");

  struct Scored {
    const InferentialChain* chain;
    std::string text;
    ChainScore score;
  };
  const auto& cases = casebase.cases();
  std::vector<std::vector<Scored>> scored(cases.size());
  auto work = [&](std::size_t i) {
    const Case& c = cases[i];
    for (const auto& chain : c.chains) {
      scored[i].push_back({&chain, chain.to_string(),
                           ChainScore{local_f1(chain, c, kg), global_f1(chain, c, dev, kg, config.neighbor_k)}});
    }
  };
  const unsigned workers = std::max(1u, config.workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < cases.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < cases.size(); i = next++) work(i);
        } catch (...) {
          errors[w] = std::current_exception();
          next = cases.size();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  ReviseResult result{CaseBase(casebase.dim()), {}};
  ReviseReport& report = result.report;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& c = cases[i];
    report.chains_before += c.chains.size();
    if (c.chainless()) {
      result.casebase.add(c);
      continue;
    }
    auto& list = scored[i];
    std::sort(list.begin(), list.end(), [](const Scored& a, const Scored& b) {
      if (a.score.local_f1 != b.score.local_f1) return a.score.local_f1 > b.score.local_f1;
      if (a.score.global_f1 != b.score.global_f1) return a.score.global_f1 > b.score.global_f1;
      return a.text < b.text;
    });
    Case kept = c;
    kept.chains.clear();
    std::vector<ChainScore> kept_scores;
    for (const auto& s : list) {
      const double gate = config.threshold_on == ThresholdOn::kLocal ? s.score.local_f1 : s.score.global_f1;
      const bool keep = gate >= config.discard_threshold &&
                        kept.chains.size() < static_cast<std::size_t>(config.max_chains_per_case);
      report.verdicts.push_back({c.case_id, *s.chain, s.score.local_f1, s.score.global_f1, keep});
      if (keep) {
        kept.chains.push_back(*s.chain);
        kept_scores.push_back(s.score);
      } else {
        ++report.chains_discarded;
      }
    }
    if (kept.chains.empty()) {
      ++report.cases_discarded;
      continue;
    }
    kept.chain_scores = std::move(kept_scores);
    result.casebase.add(std::move(kept));
  }
  return result;
}

}  // namespace cbr
