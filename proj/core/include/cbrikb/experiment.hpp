// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbrikb/drop.hpp"
#include "cbrikb/evaluate.hpp"
#include "cbrikb/kbc.hpp"
#include "cbrikb/reason.hpp"
#include "cbrikb/revise.hpp"

namespace cbr {

/// Line-oriented `key = value` settings; `#` starts a comment. Relative
/// paths resolve against the config file's directory.
struct ExperimentConfig {
  std::filesystem::path base_dir;
  std::filesystem::path kg, documents, mentions, proxies, train, dev, test, kbc_model, output_dir;
  std::string embedder = "hash";
  MaskMode mask_mode = MaskMode::kPerToken;
  std::string re_command;  // external extractor; lexical baseline when empty

  int k = 5;
  BeamConfig beam;
  bool revise = true;
  ReviseConfig revise_config;
  MiningOptions mining;

  KbcTrainConfig kbc;

  std::string drop = "none";  // none | global | per_question | both
  double drop_fraction = 0.5;
  double drop_p = 0.5;
  std::uint64_t drop_seed = 1;
  bool synthetic_support = false;  // attach one document per dropped fact

  bool ablations = false;
  unsigned workers = 1;
  bool explain = false;

  /// Canonical `key = value` text of every setting (defaults included).
  std::string canonical() const;
};

/// Throws kConfig on unknown keys or bad values.
ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// FNV-1a over the canonical settings and the bytes of every input file.
std::string fingerprint(const ExperimentConfig& config);

struct VariantResult {
  std::string name;
  EvalReport report;
  std::size_t cases = 0;
  std::size_t chains = 0;
  double seconds = 0.0;
};

struct ExperimentResult {
  std::string fingerprint;
  std::optional<DropPlan> per_question_plan;
  std::optional<DropPlan> global_plan;
  std::vector<VariantResult> variants;

  /// `variant<TAB>hits_at_1<TAB>questions<TAB>cases<TAB>chains<TAB>seconds`.
  std::string summary() const;
};

/// Variant names of the ablation matrix.
std::vector<std::string> ablation_variants();

/// Ingest, drop, build, (revise), train or load KBC, evaluate. Runs the full
/// ablation matrix when requested. Stage failures are rethrown with the stage
/// name prefixed. Writes reports under output_dir when set.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace cbr
