// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#pragma once

#include <span>
#include <string>
#include <vector>

#include "cbrikb/casebase.hpp"
#include "cbrikb/embed.hpp"
#include "cbrikb/qa.hpp"
#include "cbrikb/reason.hpp"
#include "cbrikb/retrieve.hpp"

namespace cbr {

struct Prediction {
  std::string id;
  std::vector<std::string> ranking;  // empty = abstention
  std::string explanation;           // filled when requested
};

struct EvalRecord {
  std::string id;
  std::string top1;
  bool correct = false;
  bool abstained = false;
};

struct EvalReport {
  double hits_at_1 = 0.0;
  std::vector<EvalRecord> records;
  std::string fingerprint;

  /// Header line then `id<TAB>top1<TAB>correct<TAB>abstained` per record.
  std::string to_text() const;
};

/// Correct iff the top-ranked entity is a gold answer; abstentions count as
/// wrong. Throws kContract unless predictions and examples share ids.
EvalReport hits_at_1(std::span<const Prediction> predictions, std::span<const QaExample> examples);

struct PredictSettings {
  RetrievalConfig retrieval;
  MaskMode mask_mode = MaskMode::kPerToken;
  unsigned workers = 1;
  bool explain = false;
  std::size_t explain_answers = 5;
};

/// Answers every example; output order follows the examples.
std::vector<Prediction> predict_all(std::span<const QaExample> examples, const CaseBase& casebase,
                                    const Embedder& embedder, const Reasoner& reasoner,
                                    const PredictSettings& settings);

}  // namespace cbr
