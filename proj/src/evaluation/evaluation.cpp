#include "ftm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <json.hpp>

#include "ftm/error.hpp"
#include "ftm/label_matcher.hpp"
#include "ftm/parallel.hpp"

namespace ftm {

const char* to_string(TripleLabel label) {
  switch (label) {
    case TripleLabel::Compatible:
      return "compatible";
    case TripleLabel::Divergent:
      return "divergent";
    case TripleLabel::NeedsReview:
      return "needs_review";
  }
  return "needs_review";
}

TripleLabel parse_triple_label(std::string_view name) {
  for (TripleLabel l : {TripleLabel::Compatible, TripleLabel::Divergent, TripleLabel::NeedsReview})
    if (name == to_string(l)) return l;
  throw ContractViolation("unknown triple label: " + std::string(name));
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) return out;
    start = tab + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string bare_iri(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '<' && s.back() == '>') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

std::optional<double> parse_score(std::string_view field) {
  std::string text(trim(field));
  if (text.empty()) return std::nullopt;
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string key_of(const TriplePairKey& k) {
  std::string out;
  for (const auto& t : k) {
    out += t;
    out += '\t';
  }
  return out;
}

}  // namespace

GoldStandard read_gold_tsv(std::istream& in) {
  GoldStandard gold;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view v = trim(line);
    if (v.empty() || v.front() == '#') continue;
    auto f = split_tabs(v);
    if (number == 1 && f.size() >= 2 && trim(f[0]) == "left" && trim(f[1]) == "right") continue;
    if (f.size() < 2 || trim(f[0]).empty() || trim(f[1]).empty())
      throw ParseError(number, 0, "expected `left<TAB>right`");
    gold.entity_pairs.emplace_back(bare_iri(f[0]), bare_iri(f[1]));
  }
  return gold;
}

namespace {

namespace pt = boost::property_tree;

std::string_view local_name(std::string_view tag) {
  auto colon = tag.find(':');
  return colon == std::string_view::npos ? tag : tag.substr(colon + 1);
}

// Value of the rdf:resource attribute, or the element text.
std::string resource_of(const pt::ptree& node) {
  if (auto attrs = node.get_child_optional("<xmlattr>")) {
    for (const auto& [name, value] : *attrs)
      if (local_name(name) == "resource") return value.data();
  }
  return std::string(trim(node.data()));
}

void collect_cells(const pt::ptree& tree, GoldStandard& gold) {
  for (const auto& [tag, child] : tree) {
    if (tag == "<xmlattr>" || tag == "<xmlcomment>") continue;
    if (local_name(tag) != "Cell") {
      collect_cells(child, gold);
      continue;
    }
    std::string e1, e2, relation = "=";
    for (const auto& [ctag, cnode] : child) {
      auto name = local_name(ctag);
      if (name == "entity1") e1 = resource_of(cnode);
      if (name == "entity2") e2 = resource_of(cnode);
      if (name == "relation") relation = std::string(trim(cnode.data()));
    }
    if (e1.empty() || e2.empty()) throw ParseError(0, 0, "alignment cell without entity1/entity2");
    if (relation != "=") continue;
    auto has = [&](const char* segment) {
      return e1.find(segment) != std::string::npos || e2.find(segment) != std::string::npos;
    };
    if (has("/class/")) continue;
    (has("/property/") ? gold.predicate_pairs : gold.entity_pairs).emplace_back(e1, e2);
  }
}

}  // namespace

GoldStandard read_gold_oaei(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(e.line(), 0, "alignment XML: " + e.message());
  }
  GoldStandard gold;
  collect_cells(tree, gold);
  return gold;
}

GoldStandard load_gold(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::Ingest, "cannot open gold standard: " + path.string());
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  try {
    return ext == ".xml" || ext == ".rdf" ? read_gold_oaei(in) : read_gold_tsv(in);
  } catch (const ParseError& e) {
    throw Error(ErrorCategory::Ingest, path.string() + ": " + e.what());
  }
}

std::vector<LabeledTriplePair> read_triple_gold(std::istream& in) {
  std::vector<LabeledTriplePair> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto f = split_tabs(line);
    if (number == 1 && f[0] == "s1") continue;
    if (f.size() != 7) throw ParseError(number, 0, "expected six terms and a label");
    LabeledTriplePair p;
    for (int i = 0; i < 6; ++i) p.terms[i] = std::string(f[i]);
    try {
      p.label = parse_triple_label(f[6]);
    } catch (const ContractViolation& e) {
      throw ParseError(number, 0, e.what());
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<ScoredPair> read_predictions(std::istream& in) {
  std::vector<ScoredPair> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto f = split_tabs(line);
    if (f.size() < 3) throw ParseError(number, 0, "expected `left<TAB>right<TAB>score`");
    auto score = parse_score(f[2]);
    if (!score) {
      if (number == 1) continue;
      throw ParseError(number, 0, "score is not a number: " + std::string(f[2]));
    }
    out.push_back(ScoredPair{bare_iri(f[0]), bare_iri(f[1]), *score});
  }
  return out;
}

EvalReport prf_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  EvalReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision_defined = tp + fp > 0;
  r.precision = r.precision_defined ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  const std::size_t denom = 2 * tp + fp + fn;
  r.f_measure = denom > 0 ? 2.0 * static_cast<double>(tp) / static_cast<double>(denom) : 0.0;
  return r;
}

namespace {

// Targets per source, best first (descending score, then target IRI).
std::unordered_map<std::string, std::vector<std::pair<std::string, double>>> rank(
    const std::vector<ScoredPair>& predicted) {
  std::unordered_map<std::string, std::vector<std::pair<std::string, double>>> out;
  for (const auto& p : predicted) out[p.left].emplace_back(p.right, p.score);
  for (auto& [left, list] : out) {
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
  }
  return out;
}

}  // namespace

double hit_at_k(const std::vector<ScoredPair>& predicted, const std::vector<IriPair>& gold, int k) {
  if (k < 1) throw ContractViolation("hit@k needs k >= 1");
  if (gold.empty()) return 0.0;
  auto ranked = rank(predicted);
  std::size_t hits = 0;
  for (const auto& [l, r] : gold) {
    auto it = ranked.find(l);
    if (it == ranked.end()) continue;
    const auto& list = it->second;
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(k), list.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (list[i].first == r) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

EvalReport prf_one_to_one(const std::vector<ScoredPair>& predicted, const std::vector<IriPair>& gold,
                          double threshold) {
  std::set<IriPair> gold_set(gold.begin(), gold.end());
  std::unordered_set<std::string> gold_left, gold_right;
  for (const auto& [l, r] : gold_set) {
    gold_left.insert(l);
    gold_right.insert(r);
  }
  std::vector<ScoredPair> kept_input;
  for (const auto& p : predicted)
    if (p.score >= threshold) kept_input.push_back(p);
  auto ranked = rank(kept_input);

  std::size_t tp = 0, fp = 0;
  std::set<IriPair> predicted_pairs;
  for (const auto& [left, list] : ranked) {
    for (const auto& [right, score] : list) {
      if (score != list.front().second) break;
      if (!gold_left.count(left) && !gold_right.count(right)) continue;
      if (!predicted_pairs.insert({left, right}).second) continue;
      if (gold_set.count({left, right}))
        ++tp;
      else
        ++fp;
    }
  }
  std::size_t fn = 0;
  for (const auto& g : gold_set)
    if (!predicted_pairs.count(g)) ++fn;
  EvalReport r = prf_from_counts(tp, fp, fn);
  r.threshold = threshold;
  r.valid = !gold_set.empty();
  return r;
}

void check_sweep_step(double step) {
  if (!(step > 0.0 && step <= 0.5)) throw ContractViolation("sweep step must be in (0, 0.5]");
}

EvalReport sweep_thresholds(double step, const std::function<EvalReport(double)>& evaluate, std::size_t threads) {
  check_sweep_step(step);
  const auto points = static_cast<std::size_t>(std::floor(1.0 / step + 1e-9)) + 1;
  std::vector<EvalReport> reports(points);
  parallel_chunks(points, threads, points, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) {
      // Rounded so that grid points print cleanly (0.07 rather than 0.07000000000000001).
      const double t = std::round(static_cast<double>(i) * step * 1e9) / 1e9;
      reports[i] = evaluate(t);
      reports[i].threshold = t;
    }
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < points; ++i)
    if (reports[i].f_measure > reports[best].f_measure) best = i;
  return reports[best];
}

EvalReport threshold_sweep(const std::vector<ScoredPair>& predicted, const std::vector<IriPair>& gold, double step,
                           std::size_t threads) {
  return sweep_thresholds(step, [&](double t) { return prf_one_to_one(predicted, gold, t); }, threads);
}

EvalReport triple_prf(const std::vector<ScoredTriplePair>& predicted, const std::vector<LabeledTriplePair>& gold,
                      TripleLabel target, double threshold) {
  std::unordered_map<std::string, double> scores;
  for (const auto& p : predicted) {
    auto [it, fresh] = scores.emplace(key_of(p.terms), p.score);
    if (!fresh) it->second = std::max(it->second, p.score);
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto& g : gold) {
    auto it = scores.find(key_of(g.terms));
    const bool positive = it != scores.end() && it->second >= threshold;
    if (g.label == target) {
      positive ? ++tp : ++fn;
    } else if (positive) {
      ++fp;
    }
  }
  EvalReport r = prf_from_counts(tp, fp, fn);
  r.threshold = threshold;
  r.valid = std::any_of(gold.begin(), gold.end(), [&](const auto& g) { return g.label == target; });
  return r;
}

EvalReport triple_threshold_sweep(const std::vector<ScoredTriplePair>& predicted,
                                  const std::vector<LabeledTriplePair>& gold, TripleLabel target, double step,
                                  std::size_t threads) {
  return sweep_thresholds(step, [&](double t) { return triple_prf(predicted, gold, target, t); }, threads);
}

GoldIndex::GoldIndex(const std::vector<IriPair>& pairs) {
  for (const auto& p : pairs) {
    if (!pairs_.insert(p).second) continue;
    by_left_[p.first].push_back(p.second);
    by_right_[p.second].push_back(p.first);
  }
}

bool GoldIndex::contains(const std::string& left, const std::string& right) const {
  return pairs_.count({left, right}) != 0;
}

namespace {

std::int64_t day_of(std::int64_t ts) {
  std::int64_t d = ts / 86400;
  if (ts % 86400 != 0 && ts < 0) --d;
  return d;
}

bool numbers_compatible(double a, double b) {
  const double diff = std::fabs(a - b);
  if (diff < 0.1 * std::max(std::fabs(a), std::fabs(b))) return true;
  return std::fabs(a) < 100 && std::fabs(b) < 100 && diff < 10;
}

std::vector<std::string> entity_labels(const LabeledObject& o) {
  if (!o.labels.empty()) return o.labels;
  return {fallback_label(std::get<Iri>(o.term).str())};
}

}  // namespace

TripleLabel auto_label_triple_pair(const LabeledObject& left, const LabeledObject& right, const GoldIndex& gold) {
  const auto* li = std::get_if<Iri>(&left.term);
  const auto* ri = std::get_if<Iri>(&right.term);
  if (li && ri) {
    if (gold.contains(li->str(), ri->str())) return TripleLabel::Compatible;
    if (gold.left_mapped(li->str()) || gold.right_mapped(ri->str())) return TripleLabel::Divergent;
    return TripleLabel::NeedsReview;
  }
  if (li || ri) {
    // Entity against literal: only a textual literal naming the entity agrees.
    const LabeledObject& entity = li ? left : right;
    const auto& lit = std::get<LiteralValue>(li ? right.term : left.term);
    if (lit.kind != LiteralKind::Text) return TripleLabel::Divergent;
    const std::string text = normalize_label(lit.raw);
    for (const auto& label : entity_labels(entity))
      if (normalize_label(label) == text) return TripleLabel::Compatible;
    return TripleLabel::NeedsReview;
  }
  const auto& a = std::get<LiteralValue>(left.term);
  const auto& b = std::get<LiteralValue>(right.term);
  if (a.kind != b.kind) return TripleLabel::Divergent;
  switch (a.kind) {
    case LiteralKind::Number:
      return numbers_compatible(*a.number, *b.number) ? TripleLabel::Compatible : TripleLabel::Divergent;
    case LiteralKind::DateTime:
      return day_of(*a.timestamp) == day_of(*b.timestamp) ? TripleLabel::Compatible : TripleLabel::Divergent;
    case LiteralKind::Text:
      break;
  }
  return normalize_label(a.raw) == normalize_label(b.raw) ? TripleLabel::Compatible : TripleLabel::NeedsReview;
}

std::vector<TripleCandidate> build_triple_dataset(const KnowledgeGraph& left, const KnowledgeGraph& right,
                                                  const GoldStandard& gold, double fun_min) {
  // Gold predicate pairs whose predicates are functional enough on their own graph.
  std::set<std::pair<NodeId, NodeId>> predicates;
  for (const auto& [p1, p2] : gold.predicate_pairs) {
    auto a = left.find_node(p1);
    auto b = right.find_node(p2);
    if (!a || !b || !left.is_predicate(*a) || !right.is_predicate(*b)) continue;
    if (left.stats(*a).functionality > fun_min && right.stats(*b).functionality > fun_min) predicates.emplace(*a, *b);
  }
  GoldIndex index(gold.entity_pairs);
  std::vector<TripleCandidate> out;
  std::set<IriPair> seen;
  for (const auto& pair : gold.entity_pairs) {
    if (!seen.insert(pair).second) continue;
    auto e1 = left.find_node(pair.first);
    auto e2 = right.find_node(pair.second);
    if (!e1 || !e2) continue;
    for (TripleId a : left.triples_with_subject(*e1)) {
      const auto& t1 = left.record(a);
      for (TripleId b : right.triples_with_subject(*e2)) {
        const auto& t2 = right.record(b);
        if (!predicates.count({t1.predicate, t2.predicate})) continue;
        LabeledObject o1{left.object_term(t1.object), {}};
        LabeledObject o2{right.object_term(t2.object), {}};
        if (!t1.object.is_literal) {
          auto l = left.labels(t1.object.id);
          o1.labels.assign(l.begin(), l.end());
        }
        if (!t2.object.is_literal) {
          auto l = right.labels(t2.object.id);
          o2.labels.assign(l.begin(), l.end());
        }
        out.push_back(TripleCandidate{a, b, auto_label_triple_pair(o1, o2, index)});
      }
    }
  }
  return out;
}

void write_triple_dataset(std::ostream& out, const KnowledgeGraph& left, const KnowledgeGraph& right,
                          const std::vector<TripleCandidate>& candidates) {
  std::vector<std::string> rows;
  rows.reserve(candidates.size());
  for (const auto& c : candidates) {
    Triple a = left.triple(c.left);
    Triple b = right.triple(c.right);
    rows.push_back(to_ntriples(a.subject) + '\t' + to_ntriples(a.predicate) + '\t' + to_ntriples(a.object) + '\t' +
                   to_ntriples(b.subject) + '\t' + to_ntriples(b.predicate) + '\t' + to_ntriples(b.object) + '\t' +
                   to_string(c.label));
  }
  std::sort(rows.begin(), rows.end());
  out << "s1\tp1\to1\ts2\tp2\to2\tlabel\n";
  for (const auto& r : rows) out << r << '\n';
}

std::string report_json(const EvalReport& report, int indent) {
  nlohmann::ordered_json j;
  if (!report.hit_at.empty()) {
    nlohmann::ordered_json hits;
    for (const auto& [k, v] : report.hit_at) hits[std::to_string(k)] = v;
    j["hit_at"] = hits;
  }
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["f_measure"] = report.f_measure;
  j["threshold"] = report.threshold;
  j["tp"] = report.tp;
  j["fp"] = report.fp;
  j["fn"] = report.fn;
  j["precision_defined"] = report.precision_defined;
  j["valid"] = report.valid;
  return j.dump(indent);
}

std::string report_text(const EvalReport& report) {
  std::string out;
  char buf[160];
  for (const auto& [k, v] : report.hit_at) {
    std::snprintf(buf, sizeof buf, "hit@%d %.4f\n", k, v);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "P %.2f R %.2f F %.2f threshold %.2f (tp %zu fp %zu fn %zu)%s\n",
                report.precision, report.recall, report.f_measure, report.threshold, report.tp, report.fp, report.fn,
                report.precision_defined ? "" : " [precision undefined: no predictions]");
  out += buf;
  return out;
}

}  // namespace ftm
