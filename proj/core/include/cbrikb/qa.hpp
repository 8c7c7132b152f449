// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cbrikb/chain.hpp"

namespace cbr {

/// One benchmark line: `question<TAB>ans1|ans2|...[<TAB>gold chain]`.
struct QaExample {
  std::string id;  // zero-padded 1-based line number
  std::string raw_question;
  std::vector<std::string> answers;
  std::optional<InferentialChain> gold_chain;

  /// Bracketed mentions of raw_question (the query entities).
  std::vector<std::string> query_entities() const;
};

std::vector<QaExample> parse_qa(std::string_view text);
std::vector<QaExample> parse_qa_file(const std::filesystem::path& path);
std::string serialize_qa(std::span<const QaExample> examples);

std::string format_example_id(std::size_t line_number);

}  // namespace cbr
