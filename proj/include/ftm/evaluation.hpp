#pragma once

// Alignment metrics and gold-standard tooling.

#include <array>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ftm/graph.hpp"

namespace ftm {

using IriPair = std::pair<std::string, std::string>;

enum class TripleLabel { Compatible, Divergent, NeedsReview };
const char* to_string(TripleLabel label);
TripleLabel parse_triple_label(std::string_view name);

/// A triple pair rendered as six N-Triples terms (s1 p1 o1 s2 p2 o2).
using TriplePairKey = std::array<std::string, 6>;

struct LabeledTriplePair {
  TriplePairKey terms;
  TripleLabel label = TripleLabel::NeedsReview;
};

struct GoldStandard {
  std::vector<IriPair> entity_pairs;     // (left graph, right graph)
  std::vector<IriPair> predicate_pairs;
  std::vector<LabeledTriplePair> triple_pairs;
};

/// `left \t right` per line; blank lines, `#` comments and a leading `left\tright` header are
/// skipped, IRIs may be written bare or in angle brackets. Everything goes into entity_pairs.
GoldStandard read_gold_tsv(std::istream& in);
/// OAEI Alignment-Format RDF/XML. Only cells with relation "=" are kept. Cells whose IRIs have a
/// `/property/` path segment become predicate pairs, `/class/` cells are dropped, the rest are
/// entity pairs.
GoldStandard read_gold_oaei(std::istream& in);
/// Dispatches on the extension: .xml and .rdf are OAEI, anything else is TSV.
GoldStandard load_gold(const std::filesystem::path& path);

/// Triple gold as written by write_triple_dataset: six N-Triples terms and a label per line.
std::vector<LabeledTriplePair> read_triple_gold(std::istream& in);

struct ScoredPair {
  std::string left;
  std::string right;
  double score = 0.0;
};

/// Reads `left \t right \t score [\t ...]` rows; a first line whose third field is not a number is
/// treated as a header. Throws ParseError on malformed rows.
std::vector<ScoredPair> read_predictions(std::istream& in);

struct EvalReport {
  std::map<int, double> hit_at;
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  double threshold = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0;
  bool precision_defined = true;  // false when nothing was predicted
  bool valid = true;              // false when the gold standard is empty
};

/// Precision TP/(TP+FP), recall TP/(TP+FN) and F 2TP/(2TP+FP+FN); undefined ratios report 0.
EvalReport prf_from_counts(std::size_t tp, std::size_t fp, std::size_t fn);

/// Fraction of gold pairs whose target is among the first k predicted targets of their source.
/// Predictions rank by descending score, then by target IRI. Throws ContractViolation for k < 1.
double hit_at_k(const std::vector<ScoredPair>& predicted, const std::vector<IriPair>& gold, int k);

/// One-to-one, open-world evaluation at a score threshold. Each source keeps its best targets
/// (all ties); pairs where neither entity occurs in the gold standard are ignored.
EvalReport prf_one_to_one(const std::vector<ScoredPair>& predicted, const std::vector<IriPair>& gold,
                          double threshold);

/// Evaluates `evaluate(t)` for t = 0, step, 2*step, ... up to 1 (grid points run in parallel) and
/// returns the report with the best F-measure; ties go to the lowest threshold. Throws
/// ContractViolation unless step is in (0, 0.5].
EvalReport sweep_thresholds(double step, const std::function<EvalReport(double)>& evaluate, std::size_t threads = 1);

EvalReport threshold_sweep(const std::vector<ScoredPair>& predicted, const std::vector<IriPair>& gold,
                           double step = 0.01, std::size_t threads = 1);

/// Scored triple pairs (compat or divergence) against labeled gold pairs for one class: TP are gold
/// pairs of that class predicted positive, FP gold pairs of another class predicted positive and
/// FN gold pairs of that class not predicted positive. Pairs absent from the gold are ignored.
struct ScoredTriplePair {
  TriplePairKey terms;
  double score = 0.0;
};
EvalReport triple_prf(const std::vector<ScoredTriplePair>& predicted, const std::vector<LabeledTriplePair>& gold,
                      TripleLabel target, double threshold);
EvalReport triple_threshold_sweep(const std::vector<ScoredTriplePair>& predicted,
                                  const std::vector<LabeledTriplePair>& gold, TripleLabel target, double step = 0.01,
                                  std::size_t threads = 1);

/// Index over gold entity pairs in both directions.
class GoldIndex {
 public:
  explicit GoldIndex(const std::vector<IriPair>& pairs);
  bool contains(const std::string& left, const std::string& right) const;
  bool left_mapped(const std::string& left) const { return by_left_.count(left) != 0; }
  bool right_mapped(const std::string& right) const { return by_right_.count(right) != 0; }

 private:
  std::set<IriPair> pairs_;
  std::unordered_map<std::string, std::vector<std::string>> by_left_;
  std::unordered_map<std::string, std::vector<std::string>> by_right_;
};

/// An object position together with the labels of the entity it names (empty for literals).
struct LabeledObject {
  Term term;
  std::vector<std::string> labels;
};

/// Mechanical labeling of a triple pair whose subjects and predicates are gold-matched.
TripleLabel auto_label_triple_pair(const LabeledObject& left, const LabeledObject& right, const GoldIndex& gold);

struct TripleCandidate {
  TripleId left = 0;
  TripleId right = 0;
  TripleLabel label = TripleLabel::NeedsReview;
};

/// Triple pairs whose subjects are a gold entity pair and whose predicates are a gold predicate
/// pair with functionality above `fun_min` on both sides, labeled with auto_label_triple_pair.
std::vector<TripleCandidate> build_triple_dataset(const KnowledgeGraph& left, const KnowledgeGraph& right,
                                                  const GoldStandard& gold, double fun_min = 0.8);

void write_triple_dataset(std::ostream& out, const KnowledgeGraph& left, const KnowledgeGraph& right,
                          const std::vector<TripleCandidate>& candidates);

/// Machine-readable report (JSON) and a one-line human summary.
std::string report_json(const EvalReport& report, int indent = 2);
std::string report_text(const EvalReport& report);

}  // namespace ftm
