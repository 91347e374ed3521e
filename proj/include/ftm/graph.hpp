#pragma once

// In-memory knowledge graph.
//
// Terms are dictionary-encoded: every IRI (entity or predicate) gets a NodeId and every distinct
// literal (raw, datatype, language) a LiteralId. Triples are stored once as compact records, with
// CSR-style indexes by subject, by entity object and by literal object. A graph is immutable once
// built and may be read concurrently without synchronization.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "ftm/iri.hpp"
#include "ftm/literal.hpp"

namespace ftm {

using Term = std::variant<Iri, LiteralValue>;

struct Triple {
  Iri subject;
  Iri predicate;
  Term object;

  friend bool operator==(const Triple&, const Triple&) = default;
};

using NodeId = std::uint32_t;
using LiteralId = std::uint32_t;
using TripleId = std::uint32_t;

struct ObjectRef {
  bool is_literal = false;
  std::uint32_t id = 0;  // NodeId or LiteralId

  friend bool operator==(const ObjectRef&, const ObjectRef&) = default;
};

struct TripleRecord {
  NodeId subject = 0;
  NodeId predicate = 0;
  ObjectRef object;

  friend bool operator==(const TripleRecord&, const TripleRecord&) = default;
};

struct PredicateStats {
  Iri predicate;
  std::uint64_t triple_count = 0;
  std::uint64_t distinct_subjects = 0;
  std::uint64_t distinct_objects = 0;
  double functionality = 0.0;
  double inverse_functionality = 0.0;
  double unique_ratio = 0.0;
};

/// Raw material for a graph; used by GraphBuilder and the snapshot reader.
struct GraphParts {
  std::vector<std::string> iris;
  std::vector<LiteralValue> literals;
  std::vector<TripleRecord> triples;
  std::vector<std::vector<std::string>> labels;  // indexed by NodeId, sorted and unique
  std::vector<PredicateStats> stats;             // empty means "derive from triples"
};

class KnowledgeGraph {
 public:
  KnowledgeGraph();
  explicit KnowledgeGraph(GraphParts parts);

  // The IRI lookup table holds views into the dictionary, so graphs move but never copy.
  KnowledgeGraph(const KnowledgeGraph&) = delete;
  KnowledgeGraph& operator=(const KnowledgeGraph&) = delete;
  KnowledgeGraph(KnowledgeGraph&&) noexcept = default;
  KnowledgeGraph& operator=(KnowledgeGraph&&) noexcept = default;

  std::size_t triple_count() const { return triples_.size(); }
  std::size_t node_count() const { return iris_.size(); }
  std::size_t literal_count() const { return literals_.size(); }

  const TripleRecord& record(TripleId id) const { return triples_[id]; }
  std::span<const TripleRecord> records() const { return triples_; }
  Triple triple(TripleId id) const;

  const std::string& iri(NodeId id) const { return iris_[id]; }
  std::optional<NodeId> find_node(std::string_view iri) const;

  const LiteralValue& literal(LiteralId id) const { return literals_[id]; }
  std::optional<LiteralId> find_literal(const LiteralValue& value) const;

  std::span<const TripleId> triples_with_subject(NodeId node) const;
  std::span<const TripleId> triples_with_object(NodeId node) const;
  std::span<const TripleId> triples_with_literal(LiteralId literal) const;

  std::span<const std::string> labels(NodeId node) const { return labels_[node]; }

  /// IRIs occurring in subject or object position, ascending by NodeId.
  std::span<const NodeId> entities() const { return entities_; }
  /// IRIs occurring in predicate position, ascending by NodeId.
  std::span<const NodeId> predicates() const { return predicates_; }
  bool is_entity(NodeId node) const { return (roles_[node] & kEntityRole) != 0; }
  bool is_predicate(NodeId node) const { return (roles_[node] & kPredicateRole) != 0; }

  const PredicateStats& stats(NodeId predicate) const;
  /// Throws PredicateAbsent when `predicate` never occurs in predicate position.
  const PredicateStats& stats(const Iri& predicate) const;
  /// All predicate statistics, ordered by NodeId.
  std::vector<PredicateStats> all_stats() const;

  Term object_term(const ObjectRef& object) const;

  /// Copies out the dictionary, triple table, labels and statistics.
  GraphParts to_parts() const;

 private:
  static constexpr std::uint8_t kEntityRole = 1;
  static constexpr std::uint8_t kPredicateRole = 2;

  struct Csr {
    std::vector<std::uint32_t> offsets;
    std::vector<TripleId> ids;
    std::span<const TripleId> row(std::size_t key) const;
  };

  void build_indexes();
  void derive_stats();

  std::vector<std::string> iris_;
  std::unordered_map<std::string_view, NodeId> iri_lookup_;
  std::vector<LiteralValue> literals_;
  std::unordered_map<std::string, LiteralId> literal_lookup_;
  std::vector<TripleRecord> triples_;
  std::vector<std::vector<std::string>> labels_;
  std::vector<std::uint8_t> roles_;
  std::vector<NodeId> entities_;
  std::vector<NodeId> predicates_;
  Csr by_subject_;
  Csr by_object_;
  Csr by_literal_;
  std::unordered_map<NodeId, PredicateStats> stats_;
};

/// Key used for literal identity: lexical form, datatype and language tag.
std::string literal_identity_key(const LiteralValue& value);

std::vector<Iri> default_label_predicates();

/// Human-readable label derived from an IRI: local name after the last '#', '/' or ':',
/// percent-decoded, with underscores turned into spaces.
std::string fallback_label(std::string_view iri);

/// Accumulates triples and produces an immutable KnowledgeGraph. Duplicate triples are stored once.
class GraphBuilder {
 public:
  explicit GraphBuilder(std::vector<Iri> label_predicates = default_label_predicates());

  /// Returns false when the triple was already present.
  bool add(const Triple& triple);
  bool add(std::string_view subject, std::string_view predicate, const Term& object);

  std::size_t size() const { return triples_.size(); }

  KnowledgeGraph build() &&;

 private:
  NodeId intern_iri(std::string_view iri);
  LiteralId intern_literal(const LiteralValue& value);

  static std::uint64_t hash_record(const TripleRecord& r) noexcept;
  bool insert_unique(const TripleRecord& r);

  std::unordered_set<std::string> label_predicates_;
  std::vector<std::string> iris_;
  std::unordered_map<std::string, NodeId> iri_lookup_;
  std::vector<LiteralValue> literals_;
  std::unordered_map<std::string, LiteralId> literal_lookup_;
  std::vector<TripleRecord> triples_;
  // Open-addressing set of triple indexes (stored +1, 0 = empty), sized to a power of two.
  std::vector<std::uint32_t> slots_;
  std::unordered_map<NodeId, std::vector<std::string>> explicit_labels_;
};

double compute_functionality(const KnowledgeGraph& kg, const Iri& predicate);
double compute_inverse_functionality(const KnowledgeGraph& kg, const Iri& predicate);
double compute_unique_ratio(const KnowledgeGraph& kg, const Iri& predicate);

/// N-Triples rendering of a term: <iri>, _:bnode, or an escaped literal with datatype/language.
std::string to_ntriples(const Term& term);
std::string escape_ntriples_string(std::string_view text);

}  // namespace ftm
