// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cbr-ikb Authors

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace cbr {

/// Dense handle for an interned entity name. Handles are shared by a graph
/// and every graph derived from it (sub-KBs, reduced KBs).
struct EntityId {
  std::uint32_t value = 0;
  friend auto operator<=>(EntityId, EntityId) = default;
};

enum class RelationKind : std::uint8_t { kSymbolic = 0, kFreeForm = 1 };
enum class Direction : std::uint8_t { kForward = 0, kInverse = 1 };

/// Graph-local relation handle: symbolic relation index or document index.
struct RelationRef {
  RelationKind kind = RelationKind::kSymbolic;
  std::uint32_t id = 0;
  friend auto operator<=>(const RelationRef&, const RelationRef&) = default;
};

/// Graph-independent relation label (symbolic name or document id).
struct RelationLabel {
  RelationKind kind = RelationKind::kSymbolic;
  std::string name;
  friend auto operator<=>(const RelationLabel&, const RelationLabel&) = default;
};

struct Mention {
  std::string entity;
  std::size_t begin = 0;  // byte offsets, end-exclusive
  std::size_t end = 0;
};

struct Document {
  std::string doc_id;
  std::string text;
  std::vector<Mention> mentions;

  /// First mention span of `entity`, if any.
  const Mention* mention_of(std::string_view entity) const;
};

struct Triple {
  EntityId subject;
  RelationRef relation;
  EntityId object;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept;
};
using TripleSet = std::unordered_set<Triple, TripleHash>;

/// One traversal option from an entity.
struct Neighbor {
  RelationRef relation;
  Direction direction;
  EntityId entity;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Alternating entity/relation path [e_q, r_1, e_1, ..., e_a].
struct ReasoningChain {
  std::vector<EntityId> nodes;
  std::vector<RelationRef> edges;
  std::vector<Direction> directions;

  std::size_t length() const { return edges.size(); }
  friend bool operator==(const ReasoningChain&, const ReasoningChain&) = default;
};

struct PathOptions {
  int max_len = 4;
  bool include_text = true;
  bool forward_only = false;
};

struct IngestReport {
  std::size_t entities = 0;
  std::size_t relations = 0;
  std::size_t triples = 0;
  std::size_t duplicates = 0;
};

/// In-memory knowledge graph: symbolic triples, text-derived (free-form)
/// triples, and a forward/inverse adjacency index kept in lock-step.
///
/// Built single-threaded; all const member functions are safe to call
/// concurrently afterwards.
class KnowledgeGraph {
 public:
  KnowledgeGraph();

  // ---- construction -------------------------------------------------------
  EntityId intern_entity(std::string_view name);
  std::uint32_t declare_relation(std::string_view name);
  /// Adds a symbolic triple by name. Returns false for a duplicate.
  bool add_triple(std::string_view subject, std::string_view relation, std::string_view object);
  bool add_triple(const Triple& triple);
  /// Adds each document and a free-form triple for every ordered pair of
  /// distinct entities it mentions. Throws kValidation on bad spans.
  void add_documents(std::span<const Document> documents);

  // ---- lookups ------------------------------------------------------------
  std::size_t entity_count() const { return entity_count_; }
  std::size_t relation_count() const;
  std::size_t triple_count() const { return triples_.size(); }
  std::size_t symbolic_triple_count() const;
  std::size_t document_count() const;

  bool has_entity(EntityId e) const;
  std::optional<EntityId> find_entity(std::string_view name) const;
  /// Throws kNotFound for names not in this graph.
  EntityId entity(std::string_view name) const;
  const std::string& entity_name(EntityId e) const;
  std::vector<EntityId> entities() const;

  std::optional<std::uint32_t> find_relation(std::string_view name) const;
  const std::string& relation_name(std::uint32_t id) const;
  std::vector<std::string> relation_names() const;

  const Document* find_document(std::string_view doc_id) const;
  const Document& document(std::uint32_t id) const;
  std::optional<std::uint32_t> find_document_index(std::string_view doc_id) const;

  const std::string& label_name(RelationRef r) const;
  RelationLabel label(RelationRef r) const;
  std::optional<RelationRef> resolve(const RelationLabel& label) const;

  bool contains(const Triple& t) const { return triple_index_.contains(t); }
  const std::vector<Triple>& triples() const { return triples_; }

  /// Raw adjacency: out edges carry the object, in edges the subject.
  struct Edge {
    RelationRef relation;
    EntityId other;
  };
  std::span<const Edge> out_edges(EntityId e) const;
  std::span<const Edge> in_edges(EntityId e) const;

  /// Outgoing (Forward) and incoming (Inverse) edges of e, sorted by relation
  /// name then entity name. Throws kNotFound for unknown e.
  std::vector<Neighbor> neighbors(EntityId e, bool include_text) const;

  /// Induced subgraph on everything within `hops` undirected steps of seeds.
  KnowledgeGraph subkb(std::span<const EntityId> seeds, int hops) const;

  /// All minimal-length paths src -> dst (empty if farther than max_len).
  /// Self-loops never appear on a path.
  std::vector<ReasoningChain> shortest_paths(EntityId src, EntityId dst,
                                             const PathOptions& options = {}) const;

  /// Copy without the given triples (documents and vocabulary kept).
  KnowledgeGraph without(const TripleSet& removed) const;
  /// Copy plus extra symbolic triples.
  KnowledgeGraph with(std::span<const Triple> added) const;

  std::string render(const Triple& t) const;
  std::string render(const ReasoningChain& chain) const;

 private:
  struct Vocabulary {
    std::vector<std::string> entity_names;
    std::unordered_map<std::string, std::uint32_t> entity_index;
    std::vector<std::string> relation_names;
    std::unordered_map<std::string, std::uint32_t> relation_index;
    std::vector<Document> documents;
    std::unordered_map<std::string, std::uint32_t> document_index;
  };

  Vocabulary& mutable_vocab();
  void ensure_slot(EntityId e);
  void mark_present(EntityId e);
  void check(EntityId e) const;
  KnowledgeGraph empty_like() const;

  std::shared_ptr<Vocabulary> vocab_;
  std::vector<char> present_;
  std::size_t entity_count_ = 0;
  std::vector<char> declared_;  // per relation id: member of R for this graph
  std::vector<Triple> triples_;
  TripleSet triple_index_;
  std::vector<std::vector<Edge>> out_;
  std::vector<std::vector<Edge>> in_;
};

struct IngestResult {
  KnowledgeGraph graph;
  IngestReport report;
};

/// Parses `subject<D>relation<D>object` lines; '#' lines and blank lines are
/// skipped. Throws kParse with the 1-based line number.
IngestResult ingest_kb(std::string_view text, char delimiter = '\t',
                       const std::vector<std::string>* declared_relations = nullptr);
IngestResult ingest_kb_file(const std::filesystem::path& path, char delimiter = '\t',
                            const std::vector<std::string>* declared_relations = nullptr);

/// Documents file `doc_id<TAB>text`, mentions file
/// `doc_id<TAB>entity<TAB>begin<TAB>end`.
std::vector<Document> parse_documents(std::string_view documents_text,
                                      std::string_view mentions_text);
std::string serialize_documents(std::span<const Document> documents);
std::string serialize_mentions(std::span<const Document> documents);

std::string direction_suffix(Direction d);

}  // namespace cbr

template <>
struct std::hash<cbr::EntityId> {
  std::size_t operator()(cbr::EntityId e) const noexcept { return std::hash<std::uint32_t>{}(e.value); }
};
