// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include "cbrikb/qa.hpp"

#include <cstdio>
#include <sstream>

#include "cbrikb/embed.hpp"
#include "cbrikb/error.hpp"
#include "cbrikb/text.hpp"

namespace cbr {

std::string format_example_id(std::size_t line_number) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", line_number);
  return buf;
}

std::vector<std::string> QaExample::query_entities() const {
  return mask_question(raw_question).mentions;
}

std::vector<QaExample> parse_qa(std::string_view text) {
  std::vector<QaExample> out;
  std::size_t line_no = 0;
  for (std::string_view line : lines_of(text)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    const auto fields = split(line, '\t');
    if (fields.size() < 2 || fields.size() > 3) {
      throw_error(ErrorKind::kParse, where + ": expected 2 or 3 tab-separated fields");
    }
    QaExample ex;
    ex.id = format_example_id(line_no);
    ex.raw_question = std::string(trim(fields[0]));
    try {
      if (mask_question(ex.raw_question).mention_count == 0) {
        throw_error(ErrorKind::kParse, "question has no [bracketed] mention");
      }
    } catch (const Error& e) {
      throw_error(ErrorKind::kParse, where + ": " + e.what());
    }
    if (trim(fields[1]).empty()) throw_error(ErrorKind::kParse, where + ": empty answer field");
    for (std::string_view a : split(fields[1], '|')) {
      a = trim(a);
      if (a.empty()) throw_error(ErrorKind::kParse, where + ": empty answer");
      ex.answers.emplace_back(a);
    }
    if (fields.size() == 3 && !trim(fields[2]).empty()) {
      try {
        ex.gold_chain = InferentialChain::parse(fields[2]);
      } catch (const Error& e) {
        throw_error(ErrorKind::kParse, where + ": " + e.what());
      }
    }
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<QaExample> parse_qa_file(const std::filesystem::path& path) {
  return parse_qa(read_file(path));
}

std::string serialize_qa(std::span<const QaExample> examples) {
  std::ostringstream out;
  for (const auto& ex : examples) {
    out << ex.raw_question << '\t' << join(ex.answers, "|");
    if (ex.gold_chain) out << '\t' << ex.gold_chain->to_string();
    out << '\n';
  }
  return out.str();
}

}  // namespace cbr
