#pragma once

// Triple matching: per-triple compatibility and divergence scores, the exact-attribute, inbound
// and outbound phases, and the fixed-point loop that feeds triple evidence back into entity
// similarity.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ftm/embedding.hpp"
#include "ftm/graph.hpp"
#include "ftm/ingest.hpp"
#include "ftm/label_matcher.hpp"
#include "ftm/object_similarity.hpp"

namespace ftm {

/// Score used for an entity pair that has no evidence yet.
inline constexpr double kDefaultEntityScore = 0.5;

enum class Phase { ExactAttribute, Inbound, Outbound };
enum class Classification { Compatible, Divergent, Undecided };

const char* to_string(Phase phase);
const char* to_string(Classification classification);
Phase parse_phase(std::string_view name);
Classification parse_classification(std::string_view name);

struct Thresholds {
  double entity = 0.90;
  double compatible = 0.60;
  double divergent = 0.25;
};

/// 1 - (1 - p_f)(1 - p_i) with p_f = ent*pred*fun1*fun2*obj and p_i = ent*pred*inv1*inv2*obj.
/// Throws ContractViolation when an argument lies outside [0, 1].
double triple_similarity(double ent, double pred, double fun1, double fun2, double inv1, double inv2, double obj);

/// triple_similarity with the object term replaced by (1 - obj).
double triple_divergence(double ent, double pred, double fun1, double fun2, double inv1, double inv2, double obj);

/// 1 - prod(1 - c), accumulated as a sum of log1p(-c). Any c == 1 yields exactly 1.
double entity_similarity_from_triples(std::span<const double> compat);

/// Both present: (c_l + c_t) / 2. Label only: 0.5 * c_l. Triple only: (embedding_sim + c_t) / 2,
/// which requires `embedding_sim`. Throws ContractViolation when neither score is present.
double combine_entity_similarity(std::optional<double> c_label, std::optional<double> c_triple,
                                 std::optional<double> embedding_sim = std::nullopt);

/// Compatible iff compat >= compatible; Divergent iff divergence >= divergent and not compatible.
Classification classify(double compat, std::optional<double> divergence, const Thresholds& thresholds);

inline std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) { return (std::uint64_t{a} << 32) | b; }
inline std::uint32_t key_left(std::uint64_t k) { return static_cast<std::uint32_t>(k >> 32); }
inline std::uint32_t key_right(std::uint64_t k) { return static_cast<std::uint32_t>(k); }

/// Fixed predicate alignment between the two graphs, taken from label matching.
class PredicateMap {
 public:
  PredicateMap() = default;
  explicit PredicateMap(std::span<const LabelMatch> mappings);

  std::optional<double> confidence(NodeId left, NodeId right) const;
  std::size_t size() const { return map_.size(); }

 private:
  std::unordered_map<std::uint64_t, double> map_;
};

/// Current combined similarity of entity pairs, with per-source rankings for top-k selection.
class EntityScores {
 public:
  void set(NodeId left, NodeId right, double score);
  /// Combined score, or kDefaultEntityScore for an unscored pair.
  double get(NodeId left, NodeId right) const;
  std::optional<double> find(NodeId left, NodeId right) const;

  /// Orders every source's candidates by descending score, then ascending target id.
  void finalize();
  /// Source entities with at least one scored pair, ascending.
  const std::vector<NodeId>& sources() const { return sources_; }
  /// Highest-scoring targets of `left`; all candidates tied with the k-th score are included.
  std::span<const std::pair<NodeId, double>> top_k(NodeId left, std::size_t k) const;
  /// Best target, ties broken by the lowest target id.
  std::optional<NodeId> argmax(NodeId left) const;
  std::size_t size() const { return scores_.size(); }

 private:
  std::unordered_map<std::uint64_t, double> scores_;
  std::vector<NodeId> sources_;
  std::unordered_map<NodeId, std::vector<std::pair<NodeId, double>>> ranked_;
};

/// Read-only view of both graphs shared by the phases.
class MatchContext {
 public:
  MatchContext(const KnowledgeGraph& left, const KnowledgeGraph& right, PredicateMap predicates,
               const CategoricalOptions& categorical = {});

  const KnowledgeGraph& left() const { return left_; }
  const KnowledgeGraph& right() const { return right_; }
  const PredicateMap& predicates() const { return predicates_; }
  const CategoricalDomains& left_domains() const { return left_domains_; }
  const CategoricalDomains& right_domains() const { return right_domains_; }

  double left_fun(NodeId p) const { return left_fun_[p]; }
  double left_inv(NodeId p) const { return left_inv_[p]; }
  double right_fun(NodeId p) const { return right_fun_[p]; }
  double right_inv(NodeId p) const { return right_inv_[p]; }

  /// Object similarity of two triples' objects under the given entity scores.
  double object_score(const TripleRecord& l, const TripleRecord& r, const EntityScores& scores) const;

 private:
  const KnowledgeGraph& left_;
  const KnowledgeGraph& right_;
  PredicateMap predicates_;
  CategoricalDomains left_domains_;
  CategoricalDomains right_domains_;
  // Indexed by predicate NodeId; 0 for nodes that never occur as predicates.
  std::vector<double> left_fun_, left_inv_, right_fun_, right_inv_;
};

struct TripleMapping {
  TripleId left = 0;
  TripleId right = 0;
  double compat = 0.0;
  std::optional<double> divergence;
  Phase phase = Phase::ExactAttribute;
  int iteration = 0;
  Classification classification = Classification::Undecided;
};

/// Triple pairs sharing a common literal object whose predicates are mapped. Literals carried by
/// more than `literal_cap` triples in either graph are skipped.
std::vector<TripleMapping> exact_attribute_phase(const MatchContext& ctx, const EntityScores& scores,
                                                 const CommonLiteralSet& common, std::size_t literal_cap,
                                                 std::size_t threads = 1);

/// For every source's top-k pairs, the cross product of triples having each entity as object.
std::vector<TripleMapping> inbound_phase(const MatchContext& ctx, const EntityScores& scores, std::size_t k,
                                         std::size_t threads = 1);

/// For every source's top-k pairs, the cross product of triples having each entity as subject.
std::vector<TripleMapping> outbound_phase(const MatchContext& ctx, const EntityScores& scores, std::size_t k,
                                          std::size_t threads = 1);

struct EntityMapping {
  NodeId left = 0;
  NodeId right = 0;
  std::optional<double> c_label;
  std::optional<double> c_triple;
  double combined = 0.0;
};

struct PipelineConfig {
  std::size_t k_top = 10;
  int max_iterations = 10;
  std::size_t common_literal_cap = 1000;
  /// Keep iterating while matched sources grow, or top-1 targets shift, by more than this.
  double growth_threshold = 0.10;
  double shift_threshold = 0.10;
  Thresholds thresholds;
  CategoricalOptions categorical;
  /// Supplies label similarity for pairs that only have triple evidence; when null, the best
  /// fuzzy similarity between the two label sets is used instead.
  EmbeddingProvider* embedder = nullptr;
  std::size_t threads = 1;
};

struct IterationRecord {
  int iteration = 0;
  std::size_t exact_attribute = 0;
  std::size_t inbound = 0;
  std::size_t outbound = 0;
  std::size_t triple_mappings = 0;  // cumulative, after merging
  std::size_t entity_pairs = 0;     // scored pairs after the iteration
  std::size_t matched_sources = 0;
  double growth = 0.0;
  double shift = 0.0;
  double seconds = 0.0;
};

enum class StopReason { Converged, MaxIterations };
const char* to_string(StopReason reason);

struct PipelineResult {
  std::vector<EntityMapping> entities;       // sorted by (left, right)
  std::vector<TripleMapping> triples;        // sorted by (left, right)
  std::vector<IterationRecord> history;
  StopReason stop_reason = StopReason::Converged;
  std::vector<std::string> warnings;

  /// Combined scores of `entities`, finalized.
  EntityScores scores() const;
};

PipelineResult run_pipeline(const KnowledgeGraph& left, const KnowledgeGraph& right, const LabelMappings& labels,
                            const PipelineConfig& config = {});

struct DivergenceOptions {
  Thresholds thresholds;
  CategoricalOptions categorical;
  std::size_t threads = 1;
};

/// For each source's best pair, scores the cross product of their outbound triples for both
/// compatibility and divergence and classifies every pair.
std::vector<TripleMapping> compute_divergences(const KnowledgeGraph& left, const KnowledgeGraph& right,
                                               const EntityScores& scores, const PredicateMap& predicates,
                                               const DivergenceOptions& options = {});

// Tab-separated outputs with a header line. Scores are printed with nine decimals and absent
// values as empty fields; terms in the triple file are N-Triples encoded.
void write_entity_mappings(std::ostream& out, const KnowledgeGraph& left, const KnowledgeGraph& right,
                           std::span<const EntityMapping> mappings);
void write_triple_mappings(std::ostream& out, const KnowledgeGraph& left, const KnowledgeGraph& right,
                           std::span<const TripleMapping> mappings);

/// Entity mappings as written by write_entity_mappings, resolved against the graphs. Rows naming
/// IRIs absent from either graph are skipped. Throws ParseError on malformed rows.
std::vector<EntityMapping> read_entity_mappings(std::istream& in, const KnowledgeGraph& left,
                                                const KnowledgeGraph& right);

}  // namespace ftm
