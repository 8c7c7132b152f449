// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cbrikb/casebase.hpp"
#include "cbrikb/embed.hpp"

namespace cbr {

struct RetrievalConfig {
  int k = 5;
  double min_similarity = -1.0;  // -1 disables the floor
};

struct RetrievedNeighbor {
  const Case* case_ptr = nullptr;
  double similarity = 0.0;
};

/// Exact cosine k-NN. Every case tied with the k-th best similarity is kept,
/// so the result may be longer than k. Order: similarity desc, case_id asc.
std::vector<RetrievedNeighbor> knn(const CaseBase& casebase, const EmbeddingVector& query,
                                   const RetrievalConfig& config);

struct NeighborReport {
  std::string query;         // masked (or unmasked) token string
  bool masked = true;
  struct Row {
    std::string case_id;
    std::string question;
    double similarity = 0.0;
    std::vector<std::string> chains;
  };
  std::vector<Row> rows;

  std::string to_text() const;
};

/// Neighbor listing for the masked-vs-unmasked retrieval comparison. With
/// masked=false both the query and the stored questions are re-embedded
/// with mentions left in place.
NeighborReport inspect_neighbors(const CaseBase& casebase, std::string_view raw_question,
                                 const Embedder& embedder, const RetrievalConfig& config,
                                 bool masked);

}  // namespace cbr
