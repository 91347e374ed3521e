#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ftm/graph.hpp"

namespace ftm {

enum class ObjectKind { EntityRef, Text, Number, DateTime, Categorical };

const char* to_string(ObjectKind kind);
inline constexpr ObjectKind kAllObjectKinds[] = {ObjectKind::EntityRef, ObjectKind::Text, ObjectKind::Number,
                                                 ObjectKind::DateTime, ObjectKind::Categorical};

/// Values of a low-variety textual predicate, normalized with normalize_label.
struct CategoricalDomain {
  Iri predicate;
  std::vector<std::string> values;     // sorted, unique
  std::vector<std::uint64_t> counts;   // parallel to values
};

/// Keyed by predicate NodeId of the graph the domains were detected in.
using CategoricalDomains = std::unordered_map<NodeId, CategoricalDomain>;

struct CategoricalOptions {
  double threshold = 0.05;
  std::uint64_t min_support = 50;
};

/// Predicates whose unique ratio is at most `threshold`, with at least `min_support` triples,
/// only Text literal objects and at least two distinct normalized values.
CategoricalDomains detect_categoricals(const KnowledgeGraph& kg, const CategoricalOptions& options = {});

/// An object position resolved for similarity: its kind plus whatever the rows need.
struct ObjectView {
  ObjectKind kind = ObjectKind::Text;
  NodeId entity = 0;                         // EntityRef
  std::span<const std::string> labels;       // EntityRef
  const LiteralValue* literal = nullptr;     // every literal kind
  const CategoricalDomain* domain = nullptr; // Categorical
  std::string category;                      // Categorical: normalized value
};

ObjectView resolve_object(const KnowledgeGraph& kg, const TripleRecord& triple, const CategoricalDomains& domains);

struct SimilarityContext {
  /// Current combined similarity of (left entity, right entity); callers return 0.5 when unscored.
  std::function<double(NodeId, NodeId)> entity_similarity;
};

/// Row of the object-combination table (1-11) used for an ordered kind pair. Total over all
/// 25 ordered pairs; pairs the table lists in one order are applied symmetrically.
int similarity_row(ObjectKind a, ObjectKind b);

struct ObjectSimilarity {
  double value = 0.0;
  int row = 0;
  std::string note;  // why an unresolvable pair scored 0
};

/// `left` comes from the left graph and `right` from the right graph.
ObjectSimilarity object_similarity_detail(const ObjectView& left, const ObjectView& right, const SimilarityContext& ctx);
double object_similarity(const ObjectView& left, const ObjectView& right, const SimilarityContext& ctx);

/// 1 when a == b, otherwise max(0, 1 - |a - b| / max(|a|, |b|)).
double numeric_similarity(double a, double b);

/// 1.0 on the same calendar day when either side has no time of day, or on equal instants;
/// otherwise numeric similarity of the epoch seconds.
double date_similarity(std::int64_t a, bool a_has_time, std::int64_t b, bool b_has_time);

/// Maximal integer/decimal substrings. Comma groups of three digits are honored; a leading sign
/// counts only when not preceded by a letter or digit.
std::vector<double> extract_numbers(std::string_view text);

/// A 4-digit integer in [1000, 2999] is read as January 1 of that year; anything else as epoch seconds.
std::int64_t number_as_timestamp(double value, bool* is_year = nullptr);

}  // namespace ftm
