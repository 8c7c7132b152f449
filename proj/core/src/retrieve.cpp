// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include "cbrikb/retrieve.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "cbrikb/error.hpp"

namespace cbr {

namespace {

std::vector<RetrievedNeighbor> tie_inclusive_top(std::vector<RetrievedNeighbor> scored,
                                                 const RetrievalConfig& config) {
  std::sort(scored.begin(), scored.end(), [](const RetrievedNeighbor& a, const RetrievedNeighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.case_ptr->case_id < b.case_ptr->case_id;
  });
  std::erase_if(scored, [&](const RetrievedNeighbor& n) { return n.similarity < config.min_similarity; });
  const std::size_t k = static_cast<std::size_t>(config.k);
  if (scored.size() <= k) return scored;
  const double cut = scored[k - 1].similarity;
  std::size_t end = k;
  while (end < scored.size() && scored[end].similarity >= cut) ++end;
  scored.resize(end);
  return scored;
}

}  // namespace

std::vector<RetrievedNeighbor> knn(const CaseBase& casebase, const EmbeddingVector& query,
                                   const RetrievalConfig& config) {
  require(config.k >= 1, "knn: k must be >= 1");
  if (casebase.empty()) return {};
  require(static_cast<int>(query.dim()) == casebase.dim(),
          "knn: query dim " + std::to_string(query.dim()) + " != case base dim " +
              std::to_string(casebase.dim()));
  std::vector<RetrievedNeighbor> scored;
  scored.reserve(casebase.size());
  for (const auto& c : casebase.cases()) scored.push_back({&c, cosine(query, c.embedding)});
  return tie_inclusive_top(std::move(scored), config);
}

NeighborReport inspect_neighbors(const CaseBase& casebase, std::string_view raw_question,
                                 const Embedder& embedder, const RetrievalConfig& config,
                                 bool masked) {
  require(config.k >= 1, "knn: k must be >= 1");
  const MaskMode mode = masked ? MaskMode::kPerToken : MaskMode::kOff;
  const MaskedQuestion q = mask_question(raw_question, mode);
  NeighborReport report;
  report.query = q.text();
  report.masked = masked;
  if (casebase.empty()) return report;

  std::vector<RetrievedNeighbor> hits;
  if (masked) {
    hits = knn(casebase, embedder.embed(q), config);
  } else {
    const EmbeddingVector query = embedder.embed(q);
    std::vector<RetrievedNeighbor> scored;
    for (const auto& c : casebase.cases()) {
      const EmbeddingVector v = embedder.embed(mask_question(c.question.raw, MaskMode::kOff));
      scored.push_back({&c, cosine(query, v)});
    }
    hits = tie_inclusive_top(std::move(scored), config);
  }
  for (const auto& h : hits) {
    NeighborReport::Row row;
    row.case_id = h.case_ptr->case_id;
    row.question = h.case_ptr->question.raw;
    row.similarity = h.similarity;
    for (const auto& p : h.case_ptr->chains) row.chains.push_back(p.to_string());
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string NeighborReport::to_text() const {
  std::ostringstream out;
  out << "query\t" << (masked ? "masked" : "unmasked") << '\t' << query << '\n';
  for (const auto& r : rows) {
    char sim[32];
    std::snprintf(sim, sizeof sim, "%.6f", r.similarity);
    out << "neighbor\t" << r.case_id << '\t' << sim << '\t' << r.question << '\t';
    for (std::size_t i = 0; i < r.chains.size(); ++i) out << (i ? ";" : "") << r.chains[i];
    out << '\n';
  }
  return out.str();
}

}  // namespace cbr
