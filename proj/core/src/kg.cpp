// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#include "cbrikb/kg.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <tuple>

#include "cbrikb/error.hpp"
#include "cbrikb/text.hpp"

namespace cbr {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

constexpr std::uint32_t kNone = ~std::uint32_t{0};

}  // namespace

const Mention* Document::mention_of(std::string_view entity) const {
  for (const auto& m : mentions) {
    if (m.entity == entity) return &m;
  }
  return nullptr;
}

std::size_t TripleHash::operator()(const Triple& t) const noexcept {
  std::size_t h = t.subject.value;
  h = mix(h, t.object.value);
  h = mix(h, (static_cast<std::size_t>(t.relation.id) << 1) |
                 static_cast<std::size_t>(t.relation.kind));
  return h;
}

std::string direction_suffix(Direction d) { return d == Direction::kInverse ? "^-1" : ""; }

KnowledgeGraph::KnowledgeGraph() : vocab_(std::make_shared<Vocabulary>()) {}

KnowledgeGraph::Vocabulary& KnowledgeGraph::mutable_vocab() {
  if (vocab_.use_count() > 1) vocab_ = std::make_shared<Vocabulary>(*vocab_);
  return *vocab_;
}

void KnowledgeGraph::ensure_slot(EntityId e) {
  if (e.value >= present_.size()) {
    present_.resize(e.value + 1, 0);
    out_.resize(e.value + 1);
    in_.resize(e.value + 1);
  }
}

void KnowledgeGraph::mark_present(EntityId e) {
  ensure_slot(e);
  if (!present_[e.value]) {
    present_[e.value] = 1;
    ++entity_count_;
  }
}

void KnowledgeGraph::check(EntityId e) const {
  if (!has_entity(e)) {
    throw_error(ErrorKind::kNotFound, "entity #" + std::to_string(e.value) + " not in graph");
  }
}

EntityId KnowledgeGraph::intern_entity(std::string_view name) {
  if (name.empty()) throw_error(ErrorKind::kValidation, "empty entity name");
  auto it = vocab_->entity_index.find(std::string(name));
  EntityId id;
  if (it != vocab_->entity_index.end()) {
    id = EntityId{it->second};
  } else {
    auto& v = mutable_vocab();
    id = EntityId{static_cast<std::uint32_t>(v.entity_names.size())};
    v.entity_names.emplace_back(name);
    v.entity_index.emplace(std::string(name), id.value);
  }
  mark_present(id);
  return id;
}

std::uint32_t KnowledgeGraph::declare_relation(std::string_view name) {
  if (name.empty()) throw_error(ErrorKind::kValidation, "empty relation name");
  auto it = vocab_->relation_index.find(std::string(name));
  std::uint32_t id;
  if (it != vocab_->relation_index.end()) {
    id = it->second;
  } else {
    auto& v = mutable_vocab();
    id = static_cast<std::uint32_t>(v.relation_names.size());
    v.relation_names.emplace_back(name);
    v.relation_index.emplace(std::string(name), id);
  }
  if (id >= declared_.size()) declared_.resize(id + 1, 0);
  declared_[id] = 1;
  return id;
}

bool KnowledgeGraph::add_triple(std::string_view subject, std::string_view relation,
                                std::string_view object) {
  const EntityId s = intern_entity(subject);
  const std::uint32_t r = declare_relation(relation);
  const EntityId o = intern_entity(object);
  return add_triple(Triple{s, RelationRef{RelationKind::kSymbolic, r}, o});
}

bool KnowledgeGraph::add_triple(const Triple& t) {
  if (t.subject.value >= vocab_->entity_names.size() ||
      t.object.value >= vocab_->entity_names.size()) {
    throw_error(ErrorKind::kNotFound, "triple references an unknown entity");
  }
  if (t.relation.kind == RelationKind::kSymbolic) {
    if (t.relation.id >= vocab_->relation_names.size()) {
      throw_error(ErrorKind::kNotFound, "triple references an unknown relation");
    }
    if (t.relation.id >= declared_.size()) declared_.resize(t.relation.id + 1, 0);
    declared_[t.relation.id] = 1;
  } else if (t.relation.id >= vocab_->documents.size()) {
    throw_error(ErrorKind::kNotFound, "triple references an unknown document");
  }
  if (!triple_index_.insert(t).second) return false;
  mark_present(t.subject);
  mark_present(t.object);
  triples_.push_back(t);
  out_[t.subject.value].push_back(Edge{t.relation, t.object});
  in_[t.object.value].push_back(Edge{t.relation, t.subject});
  return true;
}

void KnowledgeGraph::add_documents(std::span<const Document> documents) {
  for (const auto& doc : documents) {
    if (doc.doc_id.empty()) throw_error(ErrorKind::kValidation, "document with empty id");
    for (const auto& m : doc.mentions) {
      if (m.begin > m.end || m.end > doc.text.size()) {
        throw_error(ErrorKind::kValidation,
                    "mention span [" + std::to_string(m.begin) + "," + std::to_string(m.end) +
                        ") of '" + m.entity + "' out of bounds in document " + doc.doc_id +
                        " (length " + std::to_string(doc.text.size()) + ")");
      }
    }
  }
  for (const auto& source : documents) {
    // Stored mentions follow text order so "first mentioned" is well defined.
    Document doc = source;
    std::stable_sort(doc.mentions.begin(), doc.mentions.end(),
                     [](const Mention& a, const Mention& b) { return a.begin < b.begin; });
    auto& v = mutable_vocab();
    std::uint32_t doc_index;
    if (auto it = v.document_index.find(doc.doc_id); it != v.document_index.end()) {
      doc_index = it->second;
      v.documents[doc_index] = doc;
    } else {
      doc_index = static_cast<std::uint32_t>(v.documents.size());
      v.documents.push_back(doc);
      v.document_index.emplace(doc.doc_id, doc_index);
    }
    std::vector<EntityId> mentioned;
    for (const auto& m : doc.mentions) {
      const EntityId e = intern_entity(m.entity);
      if (std::find(mentioned.begin(), mentioned.end(), e) == mentioned.end()) {
        mentioned.push_back(e);
      }
    }
    const RelationRef label{RelationKind::kFreeForm, doc_index};
    for (EntityId a : mentioned) {
      for (EntityId b : mentioned) {
        if (a != b) add_triple(Triple{a, label, b});
      }
    }
  }
}

std::size_t KnowledgeGraph::relation_count() const {
  return static_cast<std::size_t>(std::count(declared_.begin(), declared_.end(), 1));
}

std::size_t KnowledgeGraph::symbolic_triple_count() const {
  return static_cast<std::size_t>(std::count_if(triples_.begin(), triples_.end(), [](const Triple& t) {
    return t.relation.kind == RelationKind::kSymbolic;
  }));
}

std::size_t KnowledgeGraph::document_count() const { return vocab_->documents.size(); }

bool KnowledgeGraph::has_entity(EntityId e) const {
  return e.value < present_.size() && present_[e.value];
}

std::optional<EntityId> KnowledgeGraph::find_entity(std::string_view name) const {
  auto it = vocab_->entity_index.find(std::string(name));
  if (it == vocab_->entity_index.end()) return std::nullopt;
  const EntityId e{it->second};
  if (!has_entity(e)) return std::nullopt;
  return e;
}

EntityId KnowledgeGraph::entity(std::string_view name) const {
  auto e = find_entity(name);
  if (!e) throw_error(ErrorKind::kNotFound, "unknown entity '" + std::string(name) + "'");
  return *e;
}

const std::string& KnowledgeGraph::entity_name(EntityId e) const {
  if (e.value >= vocab_->entity_names.size()) {
    throw_error(ErrorKind::kNotFound, "entity #" + std::to_string(e.value));
  }
  return vocab_->entity_names[e.value];
}

std::vector<EntityId> KnowledgeGraph::entities() const {
  std::vector<EntityId> out;
  out.reserve(entity_count_);
  for (std::uint32_t i = 0; i < present_.size(); ++i) {
    if (present_[i]) out.push_back(EntityId{i});
  }
  return out;
}

std::optional<std::uint32_t> KnowledgeGraph::find_relation(std::string_view name) const {
  auto it = vocab_->relation_index.find(std::string(name));
  if (it == vocab_->relation_index.end()) return std::nullopt;
  if (it->second >= declared_.size() || !declared_[it->second]) return std::nullopt;
  return it->second;
}

const std::string& KnowledgeGraph::relation_name(std::uint32_t id) const {
  if (id >= vocab_->relation_names.size()) {
    throw_error(ErrorKind::kNotFound, "relation #" + std::to_string(id));
  }
  return vocab_->relation_names[id];
}

std::vector<std::string> KnowledgeGraph::relation_names() const {
  std::vector<std::string> out;
  for (std::uint32_t i = 0; i < declared_.size(); ++i) {
    if (declared_[i]) out.push_back(vocab_->relation_names[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

const Document* KnowledgeGraph::find_document(std::string_view doc_id) const {
  auto idx = find_document_index(doc_id);
  return idx ? &vocab_->documents[*idx] : nullptr;
}

std::optional<std::uint32_t> KnowledgeGraph::find_document_index(std::string_view doc_id) const {
  auto it = vocab_->document_index.find(std::string(doc_id));
  if (it == vocab_->document_index.end()) return std::nullopt;
  return it->second;
}

const Document& KnowledgeGraph::document(std::uint32_t id) const {
  if (id >= vocab_->documents.size()) {
    throw_error(ErrorKind::kNotFound, "document #" + std::to_string(id));
  }
  return vocab_->documents[id];
}

const std::string& KnowledgeGraph::label_name(RelationRef r) const {
  return r.kind == RelationKind::kSymbolic ? relation_name(r.id) : document(r.id).doc_id;
}

RelationLabel KnowledgeGraph::label(RelationRef r) const { return RelationLabel{r.kind, label_name(r)}; }

std::optional<RelationRef> KnowledgeGraph::resolve(const RelationLabel& label) const {
  if (label.kind == RelationKind::kSymbolic) {
    auto id = find_relation(label.name);
    if (!id) return std::nullopt;
    return RelationRef{RelationKind::kSymbolic, *id};
  }
  auto id = find_document_index(label.name);
  if (!id) return std::nullopt;
  return RelationRef{RelationKind::kFreeForm, *id};
}

std::span<const KnowledgeGraph::Edge> KnowledgeGraph::out_edges(EntityId e) const {
  if (e.value >= out_.size()) return {};
  return out_[e.value];
}

std::span<const KnowledgeGraph::Edge> KnowledgeGraph::in_edges(EntityId e) const {
  if (e.value >= in_.size()) return {};
  return in_[e.value];
}

std::vector<Neighbor> KnowledgeGraph::neighbors(EntityId e, bool include_text) const {
  check(e);
  std::vector<Neighbor> out;
  for (const auto& edge : out_edges(e)) {
    if (!include_text && edge.relation.kind == RelationKind::kFreeForm) continue;
    out.push_back(Neighbor{edge.relation, Direction::kForward, edge.other});
  }
  for (const auto& edge : in_edges(e)) {
    if (!include_text && edge.relation.kind == RelationKind::kFreeForm) continue;
    out.push_back(Neighbor{edge.relation, Direction::kInverse, edge.other});
  }
  std::sort(out.begin(), out.end(), [this](const Neighbor& a, const Neighbor& b) {
    const auto& an = label_name(a.relation);
    const auto& bn = label_name(b.relation);
    if (an != bn) return an < bn;
    if (a.relation.kind != b.relation.kind) return a.relation.kind < b.relation.kind;
    const auto& ae = entity_name(a.entity);
    const auto& be = entity_name(b.entity);
    if (ae != be) return ae < be;
    return a.direction < b.direction;
  });
  return out;
}

KnowledgeGraph KnowledgeGraph::empty_like() const {
  KnowledgeGraph g;
  g.vocab_ = vocab_;
  g.declared_ = declared_;
  return g;
}

KnowledgeGraph KnowledgeGraph::subkb(std::span<const EntityId> seeds, int hops) const {
  require(hops >= 1, "subkb: hops must be >= 1");
  std::vector<int> depth(present_.size(), -1);
  std::deque<EntityId> queue;
  for (EntityId s : seeds) {
    check(s);
    if (depth[s.value] < 0) {
      depth[s.value] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const EntityId u = queue.front();
    queue.pop_front();
    if (depth[u.value] == hops) continue;
    auto visit = [&](EntityId v) {
      if (depth[v.value] < 0) {
        depth[v.value] = depth[u.value] + 1;
        queue.push_back(v);
      }
    };
    for (const auto& e : out_edges(u)) visit(e.other);
    for (const auto& e : in_edges(u)) visit(e.other);
  }
  KnowledgeGraph g = empty_like();
  for (std::uint32_t i = 0; i < depth.size(); ++i) {
    if (depth[i] >= 0) g.mark_present(EntityId{i});
  }
  for (const auto& t : triples_) {
    if (depth[t.subject.value] >= 0 && depth[t.object.value] >= 0) g.add_triple(t);
  }
  return g;
}

std::vector<ReasoningChain> KnowledgeGraph::shortest_paths(EntityId src, EntityId dst,
                                                           const PathOptions& options) const {
  check(src);
  check(dst);
  require(options.max_len >= 1, "shortest_paths: max_len must be >= 1");
  if (src == dst) return {ReasoningChain{{src}, {}, {}}};

  // Text triples exist for both orderings of a co-mention pair, so they are
  // only walked forward.
  auto usable_forward = [&](const Edge& e, EntityId from) {
    if (e.other == from) return false;
    return options.include_text || e.relation.kind == RelationKind::kSymbolic;
  };
  auto usable_inverse = [&](const Edge& e, EntityId from) {
    if (options.forward_only || e.other == from) return false;
    return e.relation.kind == RelationKind::kSymbolic;
  };

  std::vector<int> dist(present_.size(), -1);
  dist[src.value] = 0;
  std::deque<EntityId> queue{src};
  while (!queue.empty()) {
    const EntityId u = queue.front();
    queue.pop_front();
    if (dist[u.value] >= options.max_len || u == dst) continue;
    auto visit = [&](EntityId v) {
      if (dist[v.value] < 0) {
        dist[v.value] = dist[u.value] + 1;
        queue.push_back(v);
      }
    };
    for (const auto& e : out_edges(u)) {
      if (usable_forward(e, u)) visit(e.other);
    }
    for (const auto& e : in_edges(u)) {
      if (usable_inverse(e, u)) visit(e.other);
    }
  }
  if (dist[dst.value] < 0) return {};

  // Walk predecessor edges back from dst, one BFS layer at a time.
  struct Step {
    EntityId from;
    RelationRef relation;
    Direction direction;
  };
  std::vector<std::vector<Step>> reversed_paths;
  std::vector<Step> stack;
  std::function<void(EntityId)> walk = [&](EntityId v) {
    if (v == src) {
      reversed_paths.push_back(stack);
      return;
    }
    const int d = dist[v.value];
    // u --e--> v forward means v has an in-edge from u.
    for (const auto& e : in_edges(v)) {
      if (e.other == v || dist[e.other.value] != d - 1) continue;
      if (!options.include_text && e.relation.kind == RelationKind::kFreeForm) continue;
      stack.push_back(Step{e.other, e.relation, Direction::kForward});
      walk(e.other);
      stack.pop_back();
    }
    // u --e^-1--> v means u is the object of a triple with subject v.
    for (const auto& e : out_edges(v)) {
      if (e.other == v || dist[e.other.value] != d - 1) continue;
      if (options.forward_only || e.relation.kind != RelationKind::kSymbolic) continue;
      stack.push_back(Step{e.other, e.relation, Direction::kInverse});
      walk(e.other);
      stack.pop_back();
    }
  };
  walk(dst);

  std::vector<ReasoningChain> chains;
  chains.reserve(reversed_paths.size());
  for (const auto& rev : reversed_paths) {
    ReasoningChain c;
    c.nodes.push_back(src);
    for (auto it = rev.rbegin(); it != rev.rend(); ++it) {
      c.edges.push_back(it->relation);
      c.directions.push_back(it->direction);
    }
    for (auto it = rev.rbegin(); it != rev.rend(); ++it) {
      if (it + 1 != rev.rend()) c.nodes.push_back((it + 1)->from);
    }
    c.nodes.push_back(dst);
    chains.push_back(std::move(c));
  }
  std::vector<std::pair<std::string, ReasoningChain>> keyed;
  keyed.reserve(chains.size());
  for (auto& c : chains) keyed.emplace_back(render(c), std::move(c));
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  chains.clear();
  for (auto& [key, c] : keyed) {
    if (!chains.empty() && chains.back() == c) continue;
    chains.push_back(std::move(c));
  }
  return chains;
}

KnowledgeGraph KnowledgeGraph::without(const TripleSet& removed) const {
  KnowledgeGraph g = empty_like();
  for (std::uint32_t i = 0; i < present_.size(); ++i) {
    if (present_[i]) g.mark_present(EntityId{i});
  }
  for (const auto& t : triples_) {
    if (!removed.contains(t)) g.add_triple(t);
  }
  return g;
}

KnowledgeGraph KnowledgeGraph::with(std::span<const Triple> added) const {
  KnowledgeGraph g = *this;
  for (const auto& t : added) g.add_triple(t);
  return g;
}

std::string KnowledgeGraph::render(const Triple& t) const {
  return entity_name(t.subject) + "\t" +
         (t.relation.kind == RelationKind::kFreeForm ? "@" : "") + label_name(t.relation) + "\t" +
         entity_name(t.object);
}

std::string KnowledgeGraph::render(const ReasoningChain& chain) const {
  std::string out;
  for (std::size_t i = 0; i < chain.nodes.size(); ++i) {
    out += entity_name(chain.nodes[i]);
    if (i < chain.edges.size()) {
      out += " -[";
      if (chain.edges[i].kind == RelationKind::kFreeForm) out += "@";
      out += label_name(chain.edges[i]);
      out += direction_suffix(chain.directions[i]);
      out += "]-> ";
    }
  }
  return out;
}

IngestResult ingest_kb(std::string_view text, char delimiter,
                       const std::vector<std::string>* declared_relations) {
  IngestResult result;
  auto& g = result.graph;
  if (declared_relations) {
    for (const auto& r : *declared_relations) g.declare_relation(r);
  }
  std::size_t line_no = 0;
  for (std::string_view line : lines_of(text)) {
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    const auto fields = split(line, delimiter);
    if (fields.size() != 3) {
      throw_error(ErrorKind::kParse, "line " + std::to_string(line_no) + ": expected 3 fields, got " +
                                         std::to_string(fields.size()));
    }
    for (std::size_t f = 0; f < 3; ++f) {
      if (fields[f].empty()) {
        throw_error(ErrorKind::kParse,
                    "line " + std::to_string(line_no) + ": empty field " + std::to_string(f + 1));
      }
    }
    if (!g.add_triple(fields[0], fields[1], fields[2])) ++result.report.duplicates;
  }
  result.report.entities = g.entity_count();
  result.report.relations = g.relation_count();
  result.report.triples = g.triple_count();
  return result;
}

IngestResult ingest_kb_file(const std::filesystem::path& path, char delimiter,
                            const std::vector<std::string>* declared_relations) {
  return ingest_kb(read_file(path), delimiter, declared_relations);
}

std::vector<Document> parse_documents(std::string_view documents_text,
                                      std::string_view mentions_text) {
  std::vector<Document> docs;
  std::unordered_map<std::string, std::size_t> by_id;
  std::size_t line_no = 0;
  for (std::string_view line : lines_of(documents_text)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
      throw_error(ErrorKind::kParse, "documents line " + std::to_string(line_no) +
                                         ": expected doc_id<TAB>text");
    }
    Document d;
    d.doc_id = std::string(line.substr(0, tab));
    d.text = std::string(line.substr(tab + 1));
    if (by_id.contains(d.doc_id)) {
      throw_error(ErrorKind::kValidation, "duplicate document id " + d.doc_id);
    }
    by_id.emplace(d.doc_id, docs.size());
    docs.push_back(std::move(d));
  }
  line_no = 0;
  for (std::string_view line : lines_of(mentions_text)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line, '\t');
    const std::string where = "mentions line " + std::to_string(line_no);
    if (f.size() != 4) throw_error(ErrorKind::kParse, where + ": expected 4 fields");
    auto it = by_id.find(std::string(f[0]));
    if (it == by_id.end()) {
      throw_error(ErrorKind::kValidation, where + ": unknown document " + std::string(f[0]));
    }
    Mention m;
    m.entity = std::string(f[1]);
    if (m.entity.empty()) throw_error(ErrorKind::kParse, where + ": empty entity");
    try {
      m.begin = std::stoull(std::string(f[2]));
      m.end = std::stoull(std::string(f[3]));
    } catch (const std::exception&) {
      throw_error(ErrorKind::kParse, where + ": bad span");
    }
    docs[it->second].mentions.push_back(std::move(m));
  }
  return docs;
}

std::string serialize_documents(std::span<const Document> documents) {
  std::ostringstream out;
  for (const auto& d : documents) out << d.doc_id << '\t' << d.text << '\n';
  return out.str();
}

std::string serialize_mentions(std::span<const Document> documents) {
  std::ostringstream out;
  for (const auto& d : documents) {
    for (const auto& m : d.mentions) {
      out << d.doc_id << '\t' << m.entity << '\t' << m.begin << '\t' << m.end << '\n';
    }
  }
  return out.str();
}

}  // namespace cbr
