// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include "cbrikb/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <map>
#include <sstream>
#include <thread>

#include "cbrikb/error.hpp"

namespace cbr {

std::string EvalReport::to_text() const {
  std::ostringstream out;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", hits_at_1);
  out << "hits_at_1\t" << buf << "\tquestions\t" << records.size();
  if (!fingerprint.empty()) out << "\tfingerprint\t" << fingerprint;
  out << '\n';
  for (const auto& r : records) {
    out << r.id << '\t' << r.top1 << '\t' << (r.correct ? 1 : 0) << '\t' << (r.abstained ? 1 : 0) << '\n';
  }
  return out.str();
}

EvalReport hits_at_1(std::span<const Prediction> predictions, std::span<const QaExample> examples) {
  std::map<std::string, const Prediction*> by_id;
  for (const auto& p : predictions) {
    require(by_id.emplace(p.id, &p).second, "duplicate prediction id " + p.id);
  }
  require(by_id.size() == examples.size(), "prediction count " + std::to_string(by_id.size()) +
                                               " != example count " + std::to_string(examples.size()));
  EvalReport report;
  std::size_t correct = 0;
  for (const auto& ex : examples) {
    auto it = by_id.find(ex.id);
    require(it != by_id.end(), "no prediction for example " + ex.id);
    EvalRecord r;
    r.id = ex.id;
    r.abstained = it->second->ranking.empty();
    if (!r.abstained) {
      r.top1 = it->second->ranking.front();
      r.correct = std::find(ex.answers.begin(), ex.answers.end(), r.top1) != ex.answers.end();
    }
    correct += r.correct ? 1 : 0;
    report.records.push_back(std::move(r));
  }
  report.hits_at_1 = examples.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(examples.size());
  return report;
}

std::vector<Prediction> predict_all(std::span<const QaExample> examples, const CaseBase& casebase,
                                    const Embedder& embedder, const Reasoner& reasoner,
                                    const PredictSettings& settings) {
  std::vector<Prediction> out(examples.size());
  auto work = [&](std::size_t i) {
    const auto result = answer(examples[i].raw_question, casebase, embedder, settings.retrieval, reasoner,
                               settings.mask_mode);
    out[i].id = examples[i].id;
    out[i].ranking = result.answers.ranking;
    if (settings.explain) {
      out[i].explanation = result.explanation.to_text(result.answers, settings.explain_answers);
    }
  };
  const unsigned workers = std::max(1u, settings.workers);
  if (workers == 1 || examples.size() < 2) {
    for (std::size_t i = 0; i < examples.size(); ++i) work(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < examples.size(); i = next++) work(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next = examples.size();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace cbr
