// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cbrikb/kg.hpp"

namespace cbr {

/// ComplEx embeddings: score(s, r, o) = Re(<e_s, w_r, conj(e_o)>), mapped to
/// a probability by a fitted sigmoid(scale * score + bias).
class ComplExModel {
 public:
  ComplExModel() = default;
  ComplExModel(int dim, std::vector<std::string> entities, std::vector<std::string> relations);

  int dim() const { return dim_; }
  std::size_t entity_count() const { return entity_names_.size(); }
  std::size_t relation_count() const { return relation_names_.size(); }
  const std::vector<std::string>& entity_names() const { return entity_names_; }
  const std::vector<std::string>& relation_names() const { return relation_names_; }

  std::optional<std::uint32_t> entity_index(std::string_view name) const;
  std::optional<std::uint32_t> relation_index(std::string_view name) const;

  double score(std::uint32_t s, std::uint32_t r, std::uint32_t o) const;
  double probability(double raw_score) const;
  double prob(std::uint32_t s, std::uint32_t r, std::uint32_t o) const {
    return probability(score(s, r, o));
  }

  double scale = 1.0;
  double bias = 0.0;

  // Row-major [count x dim] parameter blocks.
  std::vector<double> entity_re, entity_im, relation_re, relation_im;

  bool all_finite() const;
  friend bool operator==(const ComplExModel&, const ComplExModel&) = default;

 private:
  int dim_ = 0;
  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  std::unordered_map<std::string, std::uint32_t> entity_index_;
  std::unordered_map<std::string, std::uint32_t> relation_index_;
};

struct KbcTrainConfig {
  int dim = 64;
  int epochs = 200;
  double learning_rate = 0.1;
  int negatives_per_positive = 16;
  double l2_weight = 1e-4;
  std::uint64_t seed = 1;
  double calibration_fraction = 0.05;
  double init_scale = 0.1;
};

struct KbcTrainReport {
  std::size_t training_triples = 0;
  std::size_t calibration_triples = 0;
  std::vector<double> epoch_loss;  // mean per-example loss
};

/// Name-level API; unknown names throw kNotFound.
double complex_score(const ComplExModel& model, std::string_view s, std::string_view r,
                     std::string_view o);
double kbc_prob(const ComplExModel& model, std::string_view s, std::string_view r,
                std::string_view o);

/// Binary cross-entropy with uniformly corrupted negatives and Adagrad.
/// Deterministic for a given seed. Throws kTraining without symbolic triples.
ComplExModel train_complex(const KnowledgeGraph& kg, const KbcTrainConfig& config,
                           KbcTrainReport* report = nullptr);

/// Per-parameter gradient of one example's loss (exposed for checking).
struct ExampleGradient {
  std::vector<double> s_re, s_im, r_re, r_im, o_re, o_im;
};
double example_loss(const ComplExModel& model, std::uint32_t s, std::uint32_t r, std::uint32_t o,
                    bool positive, double l2_weight);
double example_loss_and_gradient(const ComplExModel& model, std::uint32_t s, std::uint32_t r,
                                 std::uint32_t o, bool positive, double l2_weight,
                                 ExampleGradient& grad);

/// Platt fit of (scale, bias) on raw scores and labels.
std::pair<double, double> fit_platt(std::span<const double> scores, std::span<const int> labels);

using ScoredEntity = std::pair<std::string, double>;

/// Top-m objects of (s, r, ?) with prob > threshold; prob desc, name asc.
std::vector<ScoredEntity> predict_objects(const ComplExModel& model, std::string_view s,
                                          std::string_view r, int m, double threshold);
/// Top-m subjects of (?, r, o).
std::vector<ScoredEntity> predict_subjects(const ComplExModel& model, std::string_view o,
                                           std::string_view r, int m, double threshold);

struct NamedTriple {
  std::string subject, relation, object;
  friend auto operator<=>(const NamedTriple&, const NamedTriple&) = default;
};

struct KbcMetrics {
  double mrr = 0.0;
  double hits_at_1 = 0.0;
  double hits_at_3 = 0.0;
  double hits_at_10 = 0.0;
  std::size_t queries = 0;
};

/// Filtered ranking over both (s, r, ?) and (?, r, o). A tie with the true
/// entity does not push it down (rank = 1 + strictly better candidates).
KbcMetrics evaluate_kbc(const ComplExModel& model, std::span<const NamedTriple> held_out,
                        const KnowledgeGraph& kg);

std::string encode_model(const ComplExModel& model);
ComplExModel decode_model(std::string_view bytes);
void store_model(const std::filesystem::path& path, const ComplExModel& model);
ComplExModel load_model(const std::filesystem::path& path);

}  // namespace cbr
