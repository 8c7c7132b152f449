// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include "cbrikb/drop.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "cbrikb/error.hpp"
#include "cbrikb/rng.hpp"
#include "cbrikb/text.hpp"

namespace cbr {

namespace {

NamedTriple named(const KnowledgeGraph& kg, const Triple& t) {
  return {kg.entity_name(t.subject), kg.label_name(t.relation), kg.entity_name(t.object)};
}

std::vector<EntityId> query_ids(const KnowledgeGraph& kg, const QaExample& ex) {
  std::vector<EntityId> ids;
  for (const auto& m : ex.query_entities()) {
    if (auto e = kg.find_entity(m)) ids.push_back(*e);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string_view to_string(DropScheme scheme) {
  return scheme == DropScheme::kGlobal ? "global" : "per_question";
}

std::vector<Triple> gold_support(const KnowledgeGraph& kg, const QaExample& example) {
  std::vector<Triple> support;
  if (!example.gold_chain) return support;
  std::vector<EntityId> frontier = query_ids(kg, example);
  for (const auto& step : example.gold_chain->steps) {
    const auto ref = kg.resolve(step.label);
    if (!ref) break;
    std::vector<EntityId> next;
    for (EntityId e : frontier) {
      const bool fwd = step.direction == Direction::kForward;
      for (const auto& edge : fwd ? kg.out_edges(e) : kg.in_edges(e)) {
        if (edge.relation != *ref) continue;
        next.push_back(edge.other);
        support.push_back(fwd ? Triple{e, *ref, edge.other} : Triple{edge.other, *ref, e});
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    frontier = std::move(next);
  }
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  return support;
}

KnowledgeGraph apply_plan(const KnowledgeGraph& kg, const DropPlan& plan) {
  TripleSet removed;
  for (const auto& t : plan.dropped) {
    const auto s = kg.find_entity(t.subject);
    const auto r = kg.find_relation(t.relation);
    const auto o = kg.find_entity(t.object);
    if (!s || !r || !o) {
      throw_error(ErrorKind::kValidation, "drop plan names a triple absent from the graph: " +
                                              t.subject + " " + t.relation + " " + t.object);
    }
    removed.insert(Triple{*s, RelationRef{RelationKind::kSymbolic, *r}, *o});
  }
  return kg.without(removed);
}

DropResult drop_global(const KnowledgeGraph& kg, double fraction, std::uint64_t seed,
                       std::span<const QaExample> examples) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw_error(ErrorKind::kConfig, "global drop fraction must lie in (0, 1)");
  }
  std::vector<NamedTriple> symbolic;
  for (const auto& t : kg.triples()) {
    if (t.relation.kind == RelationKind::kSymbolic) symbolic.push_back(named(kg, t));
  }
  // Canonical order first, so the sample does not depend on ingestion order.
  std::sort(symbolic.begin(), symbolic.end());
  const auto n = static_cast<std::size_t>(fraction * static_cast<double>(symbolic.size()));
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(symbolic.size() - i));
    std::swap(symbolic[i], symbolic[j]);
  }
  DropPlan plan;
  plan.scheme = DropScheme::kGlobal;
  plan.parameter = fraction;
  plan.seed = seed;
  plan.dropped.assign(symbolic.begin(), symbolic.begin() + static_cast<std::ptrdiff_t>(n));
  std::sort(plan.dropped.begin(), plan.dropped.end());

  const std::set<NamedTriple> gone(plan.dropped.begin(), plan.dropped.end());
  for (const auto& ex : examples) {
    if (!ex.gold_chain) {
      ++plan.skipped;
      continue;
    }
    for (const auto& t : gold_support(kg, ex)) {
      if (gone.contains(named(kg, t))) {
        plan.affected.push_back(ex.id);
        break;
      }
    }
  }
  std::sort(plan.affected.begin(), plan.affected.end());
  KnowledgeGraph reduced = apply_plan(kg, plan);
  return {std::move(plan), std::move(reduced)};
}

DropResult drop_per_question(const KnowledgeGraph& kg, std::span<const QaExample> examples, double p,
                             std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw_error(ErrorKind::kConfig, "drop probability must lie in [0, 1]");
  DropPlan plan;
  plan.scheme = DropScheme::kPerQuestion;
  plan.parameter = p;
  plan.seed = seed;
  std::set<NamedTriple> dropped;
  SplitMix64 rng(seed);
  for (const auto& ex : examples) {
    if (!ex.gold_chain) {
      ++plan.skipped;
      continue;
    }
    std::vector<std::string> relations;
    for (const auto& step : ex.gold_chain->steps) {
      if (step.label.kind == RelationKind::kSymbolic) relations.push_back(step.label.name);
    }
    std::sort(relations.begin(), relations.end());
    relations.erase(std::unique(relations.begin(), relations.end()), relations.end());
    // One draw decides selection; a second picks the relation.
    if (!(rng.next_double() < p) || relations.empty()) continue;
    const std::string& chosen = relations[static_cast<std::size_t>(rng.below(relations.size()))];
    const auto ids = query_ids(kg, ex);
    if (ids.empty()) continue;
    bool hit = false;
    const KnowledgeGraph sub = kg.subkb(ids, 2);
    for (const auto& t : sub.triples()) {
      if (t.relation.kind != RelationKind::kSymbolic) continue;
      if (kg.relation_name(t.relation.id) != chosen) continue;
      dropped.insert(named(kg, t));
      hit = true;
    }
    if (hit) plan.affected.push_back(ex.id);
  }
  plan.dropped.assign(dropped.begin(), dropped.end());
  std::sort(plan.affected.begin(), plan.affected.end());
  plan.affected.erase(std::unique(plan.affected.begin(), plan.affected.end()), plan.affected.end());
  KnowledgeGraph reduced = apply_plan(kg, plan);
  return {std::move(plan), std::move(reduced)};
}

std::string DropPlan::to_text() const {
  std::ostringstream out;
  out << "scheme\t" << to_string(scheme) << '\n';
  out << "parameter\t" << format_real(parameter) << '\n';
  out << "seed\t" << seed << '\n';
  out << "skipped\t" << skipped << '\n';
  out << "dropped\t" << dropped.size() << '\n';
  for (const auto& t : dropped) out << t.subject << '\t' << t.relation << '\t' << t.object << '\n';
  out << "affected\t" << affected.size() << '\n';
  for (const auto& id : affected) out << id << '\n';
  return out.str();
}

DropPlan DropPlan::parse(std::string_view text) {
  const auto lines = lines_of(text);
  std::size_t i = 0;
  auto header = [&](std::string_view key) -> std::string {
    if (i >= lines.size()) throw_error(ErrorKind::kParse, "drop plan: missing '" + std::string(key) + "'");
    const auto f = split(lines[i], '\t');
    if (f.size() != 2 || f[0] != key) {
      throw_error(ErrorKind::kParse,
                  "drop plan line " + std::to_string(i + 1) + ": expected '" + std::string(key) + "'");
    }
    ++i;
    return std::string(f[1]);
  };
  auto count = [&](std::string_view key) {
    const std::string v = header(key);
    try {
      return static_cast<std::size_t>(std::stoull(v));
    } catch (const std::exception&) {
      throw_error(ErrorKind::kParse, "drop plan: bad count for '" + std::string(key) + "'");
    }
  };
  DropPlan plan;
  const std::string scheme = header("scheme");
  if (scheme == "global") plan.scheme = DropScheme::kGlobal;
  else if (scheme == "per_question") plan.scheme = DropScheme::kPerQuestion;
  else throw_error(ErrorKind::kParse, "drop plan: unknown scheme '" + scheme + "'");
  try {
    plan.parameter = std::stod(header("parameter"));
    plan.seed = std::stoull(header("seed"));
  } catch (const std::invalid_argument&) {
    throw_error(ErrorKind::kParse, "drop plan: bad number");
  }
  plan.skipped = count("skipped");
  const std::size_t n = count("dropped");
  for (std::size_t k = 0; k < n; ++k, ++i) {
    if (i >= lines.size()) throw_error(ErrorKind::kParse, "drop plan: truncated triple list");
    const auto f = split(lines[i], '\t');
    if (f.size() != 3) throw_error(ErrorKind::kParse, "drop plan line " + std::to_string(i + 1) + ": bad triple");
    plan.dropped.push_back({std::string(f[0]), std::string(f[1]), std::string(f[2])});
  }
  const std::size_t m = count("affected");
  for (std::size_t k = 0; k < m; ++k, ++i) {
    if (i >= lines.size()) throw_error(ErrorKind::kParse, "drop plan: truncated affected list");
    plan.affected.emplace_back(lines[i]);
  }
  return plan;
}

}  // namespace cbr
