// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include "cbrikb/casebase.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <set>
#include <sstream>
#include <thread>

#include "cbrikb/binary.hpp"
#include "cbrikb/error.hpp"
#include "cbrikb/text.hpp"

namespace cbr {

namespace {

constexpr std::string_view kMagic = "CBRB";
constexpr std::uint32_t kVersion = 1;

std::vector<std::string> sorted_unique(std::span<const std::string> items) {
  std::vector<std::string> out(items.begin(), items.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

MiningResult mine_chains(const KnowledgeGraph& kg, std::span<const std::string> query_entities,
                         std::span<const std::string> answers, const MiningOptions& options) {
  MiningResult result;
  std::vector<EntityId> sources, targets;
  for (const auto& name : query_entities) {
    if (auto e = kg.find_entity(name)) sources.push_back(*e);
    else ++result.skipped_entities;
  }
  for (const auto& name : answers) {
    if (auto e = kg.find_entity(name)) targets.push_back(*e);
    else ++result.skipped_entities;
  }
  if (sources.empty() && targets.empty()) {
    throw_error(ErrorKind::kUnminable, "none of the query entities or answers is in the graph");
  }
  PathOptions path_options;
  path_options.max_len = options.max_len;
  path_options.include_text = options.include_text;
  path_options.forward_only = options.forward_only;

  std::set<InferentialChain> chains;
  for (EntityId q : sources) {
    for (EntityId a : targets) {
      if (q == a) continue;
      for (const auto& path : kg.shortest_paths(q, a, path_options)) {
        chains.insert(to_inferential(kg, path));
      }
    }
  }
  result.chains.assign(chains.begin(), chains.end());
  return result;
}

const Case* CaseBase::find(std::string_view case_id) const {
  for (const auto& c : cases_) {
    if (c.case_id == case_id) return &c;
  }
  return nullptr;
}

void CaseBase::add(Case c) {
  if (dim_ == 0 && cases_.empty()) dim_ = static_cast<int>(c.embedding.dim());
  require(static_cast<int>(c.embedding.dim()) == dim_,
          "case " + c.case_id + ": embedding dim " + std::to_string(c.embedding.dim()) +
              " != case base dim " + std::to_string(dim_));
  auto pos = std::lower_bound(ids_.begin(), ids_.end(), c.case_id);
  require(pos == ids_.end() || *pos != c.case_id, "duplicate case id " + c.case_id);
  ids_.insert(pos, c.case_id);
  cases_.push_back(std::move(c));
}

bool operator==(const Case& a, const Case& b) {
  return a.case_id == b.case_id && a.question.masked == b.question.masked &&
         a.question.raw == b.question.raw && a.embedding == b.embedding &&
         a.query_entities == b.query_entities && a.gold_answers == b.gold_answers &&
         a.chains == b.chains && a.chain_scores == b.chain_scores;
}

bool operator==(const CaseBase& a, const CaseBase& b) {
  return a.dim_ == b.dim_ && a.cases_ == b.cases_;
}

Case build_case(std::string case_id, std::string_view raw_question,
                std::span<const std::string> answers, const KnowledgeGraph& kg,
                const Embedder& embedder, const CaseOptions& options) {
  MaskedQuestion masked = mask_question(raw_question, options.mask_mode);
  if (masked.mention_count == 0) {
    throw_error(ErrorKind::kInput, "question has no [bracketed] mention: " + std::string(raw_question));
  }
  Case c;
  c.case_id = std::move(case_id);
  c.embedding = embedder.embed(masked);
  c.query_entities = sorted_unique(masked.mentions);
  c.gold_answers = sorted_unique(answers);
  c.question = std::move(masked);
  c.chains = mine_chains(kg, c.query_entities, c.gold_answers, options.mining).chains;
  return c;
}

BuildResult build_casebase(std::span<const QaExample> examples, const KnowledgeGraph& kg,
                           const Embedder& embedder, const BuildConfig& config) {
  enum class Outcome { kOk, kSkipped, kUnminable };
  struct Slot {
    Outcome outcome = Outcome::kOk;
    std::optional<Case> c;
  };
  std::vector<Slot> slots(examples.size());

  auto work = [&](std::size_t i) {
    const auto& ex = examples[i];
    const std::string id = config.id_prefix + ex.id;
    try {
      slots[i].c = build_case(id, ex.raw_question, ex.answers, kg, embedder, config.case_options);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kInput) {
        slots[i].outcome = Outcome::kSkipped;
      } else if (e.kind() == ErrorKind::kUnminable) {
        // Keep the case, chainless: it still counts toward dataset stats.
        slots[i].outcome = Outcome::kUnminable;
        MaskedQuestion masked = mask_question(ex.raw_question, config.case_options.mask_mode);
        Case c;
        c.case_id = id;
        c.embedding = embedder.embed(masked);
        c.query_entities = sorted_unique(masked.mentions);
        c.gold_answers = sorted_unique(ex.answers);
        c.question = std::move(masked);
        slots[i].c = std::move(c);
      } else {
        throw;
      }
    }
  };

  const unsigned workers = std::max(1u, config.workers);
  if (workers == 1 || examples.size() < 2) {
    for (std::size_t i = 0; i < examples.size(); ++i) work(i);
  } else {
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
  }

  BuildResult result{CaseBase(embedder.dim()), {}};
  std::size_t total_chains = 0;
  for (auto& slot : slots) {
    if (slot.outcome == Outcome::kSkipped) {
      ++result.report.skipped;
      continue;
    }
    if (slot.outcome == Outcome::kUnminable) ++result.report.unminable;
    if (slot.c->chainless()) ++result.report.chainless;
    total_chains += slot.c->chains.size();
    result.casebase.add(std::move(*slot.c));
  }
  result.report.cases = result.casebase.size();
  result.report.mean_chains =
      result.report.cases ? static_cast<double>(total_chains) / result.report.cases : 0.0;
  return result;
}

BuildResult build_casebase(const std::filesystem::path& train_file, const KnowledgeGraph& kg,
                           const Embedder& embedder, const BuildConfig& config) {
  const auto examples = parse_qa_file(train_file);
  return build_casebase(examples, kg, embedder, config);
}

std::string encode_casebase(const CaseBase& casebase) {
  EmbeddingTable table;
  table.dim = static_cast<std::uint32_t>(casebase.dim());
  std::ostringstream lines;
  for (const auto& c : casebase.cases()) {
    table.entries.emplace(c.case_id, c.embedding);
    std::vector<std::string> chains;
    for (const auto& p : c.chains) chains.push_back(p.to_string());
    std::vector<std::string> scores;
    if (c.chain_scores) {
      for (const auto& s : *c.chain_scores) {
        scores.push_back(format_real(s.local_f1) + ":" + format_real(s.global_f1));
      }
    }
    lines << c.case_id << '\t' << join(c.query_entities, "|") << '\t' << join(c.gold_answers, "|")
          << '\t' << join(chains, ";") << '\t' << c.question.raw << '\t'
          << (c.chain_scores ? "S" + join(scores, ";") : std::string()) << '\n';
  }
  const std::string cbre = encode_embeddings(table);
  const std::string text = lines.str();
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kVersion);
  w.u64(cbre.size());
  w.bytes(cbre);
  w.u64(text.size());
  w.bytes(text);
  return w.take();
}

CaseBase decode_casebase(std::string_view bytes) {
  ByteReader r(bytes, "CBRB");
  if (bytes.size() < 4 || r.bytes(4) != kMagic) throw_error(ErrorKind::kFormat, "CBRB: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw_error(ErrorKind::kFormat, "CBRB: unsupported version " + std::to_string(version));
  }
  const EmbeddingTable table = decode_embeddings(r.bytes(r.u64()));
  const std::string_view text = r.bytes(r.u64());
  if (r.remaining() != 0) throw_error(ErrorKind::kFormat, "CBRB: trailing bytes");

  CaseBase cb(static_cast<int>(table.dim));
  std::size_t line_no = 0;
  for (std::string_view line : lines_of(text)) {
    ++line_no;
    const auto f = split(line, '\t');
    const std::string where = "CBRB chain section line " + std::to_string(line_no);
    if (f.size() != 6) throw_error(ErrorKind::kFormat, where + ": expected 6 fields");
    Case c;
    c.case_id = std::string(f[0]);
    auto it = table.entries.find(c.case_id);
    if (it == table.entries.end()) throw_error(ErrorKind::kFormat, where + ": no embedding for case");
    c.embedding = it->second;
    for (auto e : split(f[1], '|')) {
      if (!e.empty()) c.query_entities.emplace_back(e);
    }
    for (auto e : split(f[2], '|')) {
      if (!e.empty()) c.gold_answers.emplace_back(e);
    }
    if (!f[3].empty()) {
      for (auto p : split(f[3], ';')) c.chains.push_back(InferentialChain::parse(p));
    }
    c.question = mask_question(f[4]);
    if (!f[5].empty()) {
      if (f[5].front() != 'S') throw_error(ErrorKind::kFormat, where + ": bad score field");
      std::vector<ChainScore> scores;
      const std::string_view body = f[5].substr(1);
      if (!body.empty()) {
        for (auto s : split(body, ';')) {
          const auto lg = split(s, ':');
          if (lg.size() != 2) throw_error(ErrorKind::kFormat, where + ": bad score pair");
          scores.push_back(ChainScore{std::stod(std::string(lg[0])), std::stod(std::string(lg[1]))});
        }
      }
      if (scores.size() != c.chains.size()) {
        throw_error(ErrorKind::kFormat, where + ": score count does not match chain count");
      }
      c.chain_scores = std::move(scores);
    }
    cb.add(std::move(c));
  }
  if (cb.size() != table.entries.size()) {
    throw_error(ErrorKind::kFormat, "CBRB: embedding block and chain section disagree on case count");
  }
  return cb;
}

void store_casebase(const std::filesystem::path& path, const CaseBase& casebase) {
  write_file(path, encode_casebase(casebase));
}

CaseBase load_casebase(const std::filesystem::path& path) {
  return decode_casebase(read_file(path));
}

}  // namespace cbr
