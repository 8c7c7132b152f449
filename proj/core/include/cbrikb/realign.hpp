// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cbrikb/kg.hpp"

namespace cbr {

inline constexpr std::string_view kSubjectPlaceholder = "<SUBJ>";
inline constexpr std::string_view kObjectPlaceholder = "<OBJ>";

/// One fixed sentence per symbolic relation, with <SUBJ>/<OBJ> slots.
struct ProxyTextTable {
  std::map<std::string, std::string> texts;
  std::size_t duplicates = 0;  // repeated relation lines (last one wins)

  std::vector<std::string> relations() const;
};

/// `relation<TAB>text` lines, validated against `relations` (missing or
/// extra names, missing placeholders -> kValidation).
ProxyTextTable parse_proxy_texts(std::string_view text, std::span<const std::string> relations);
ProxyTextTable load_proxy_texts(const std::filesystem::path& path,
                                std::span<const std::string> relations);

struct TextSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// What a relation extractor sees: text plus subject and object spans.
struct ReInput {
  std::string text;
  TextSpan subject;
  TextSpan object;
};

ReInput proxy_input(std::string_view proxy_text);
/// Throws kContract when either entity has no mention in the document.
ReInput document_input(const Document& doc, std::string_view subject, std::string_view object);

struct LabelDistribution {
  std::map<std::string, double> probs;

  std::string argmax() const;  // ties -> smallest label
  bool valid(double tolerance = 1e-9) const;
};

/// Probability that independent draws from p and q agree: sum_l p(l) q(l).
/// Throws kContract when the label sets differ.
double agreement(const LabelDistribution& p, const LabelDistribution& q);

class RelationScorer {
 public:
  virtual ~RelationScorer() = default;
  virtual LabelDistribution distribution(const ReInput& input) const = 0;
};

/// Dependency-free baseline: TF-IDF over the proxy vocabulary (mention spans
/// excluded), cosine to every proxy, softmax with a temperature.
class LexicalScorer final : public RelationScorer {
 public:
  explicit LexicalScorer(const ProxyTextTable& proxies, double temperature = 0.1);
  LabelDistribution distribution(const ReInput& input) const override;

  /// Cosine of the input against each proxy, in label order.
  std::vector<double> similarities(const ReInput& input) const;
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::vector<double> vectorize(const ReInput& input) const;

  double temperature_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> vocab_;
  std::vector<double> idf_;
  std::vector<std::vector<double>> proxy_vectors_;  // unit length or zero
};

/// Line protocol to an external extractor. Request:
/// `text<US>begin:end<US>begin:end\n`; response `label:prob,label:prob\n`
/// (US = 0x1F). Calls are serialized; one child process per scorer.
class SubprocessScorer final : public RelationScorer {
 public:
  explicit SubprocessScorer(std::vector<std::string> argv);
  ~SubprocessScorer() override;
  SubprocessScorer(const SubprocessScorer&) = delete;
  SubprocessScorer& operator=(const SubprocessScorer&) = delete;

  LabelDistribution distribution(const ReInput& input) const override;

  static std::string encode_request(const ReInput& input);
  static LabelDistribution decode_response(std::string_view line);

 private:
  mutable std::mutex mu_;
  int to_child_ = -1;
  int from_child_ = -1;
  int pid_ = -1;
  mutable std::string buffer_;
};

struct Alignment {
  std::string relation;
  double probability = 0.0;
  bool tied = false;
};

/// Bridges text evidence to symbolic relations via proxy-text agreement.
/// Thread-safe; results are memoized per (document, subject, object).
class ReAligner {
 public:
  ReAligner(std::shared_ptr<const RelationScorer> scorer, ProxyTextTable proxies);

  const ProxyTextTable& proxies() const { return proxies_; }
  const LabelDistribution& proxy_distribution(std::string_view relation) const;

  /// Pr(RE(d_r) = RE(d)) for the subject/object mention pair in d.
  double support(const Document& doc, std::string_view subject, std::string_view object,
                 std::string_view relation) const;

  /// argmax_r agreement(d, d_r); the document's first two distinct mentions
  /// serve as subject/object. Ties go to the smallest relation name.
  Alignment align(const Document& doc) const;

 private:
  const LabelDistribution& document_distribution(const Document& doc, std::string_view subject,
                                                 std::string_view object) const;

  std::shared_ptr<const RelationScorer> scorer_;
  ProxyTextTable proxies_;
  std::map<std::string, LabelDistribution, std::less<>> proxy_dists_;
  mutable std::mutex mu_;
  mutable std::map<std::string, LabelDistribution, std::less<>> doc_cache_;
  mutable std::map<std::string, Alignment, std::less<>> align_cache_;
};

}  // namespace cbr
