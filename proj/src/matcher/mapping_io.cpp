#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "ftm/error.hpp"
#include "ftm/triple_matcher.hpp"

namespace ftm {

namespace {

constexpr const char* kEntityHeader = "left\tright\tcombined\tc_label\tc_triple";
constexpr const char* kTripleHeader =
    "s1\tp1\to1\ts2\tp2\to2\tcompat\tdivergence\tphase\tclassification";

std::string score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

std::string score(const std::optional<double>& v) { return v ? score(*v) : std::string(); }

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

std::optional<double> parse_score(std::string_view field, std::size_t line, bool required) {
  if (field.empty()) {
    if (required) throw ParseError(line, 0, "missing score");
    return std::nullopt;
  }
  std::string text(field);
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || !(v >= 0.0 && v <= 1.0))
    throw ParseError(line, 0, "score must be a number in [0,1]: " + text);
  return v;
}

}  // namespace

void write_entity_mappings(std::ostream& out, const KnowledgeGraph& left, const KnowledgeGraph& right,
                           std::span<const EntityMapping> mappings) {
  std::vector<const EntityMapping*> rows;
  rows.reserve(mappings.size());
  for (const auto& m : mappings) rows.push_back(&m);
  std::sort(rows.begin(), rows.end(), [&](const EntityMapping* a, const EntityMapping* b) {
    int c = left.iri(a->left).compare(left.iri(b->left));
    if (c != 0) return c < 0;
    return right.iri(a->right) < right.iri(b->right);
  });
  out << kEntityHeader << '\n';
  for (const auto* m : rows) {
    out << left.iri(m->left) << '\t' << right.iri(m->right) << '\t' << score(m->combined) << '\t' << score(m->c_label)
        << '\t' << score(m->c_triple) << '\n';
  }
}

void write_triple_mappings(std::ostream& out, const KnowledgeGraph& left, const KnowledgeGraph& right,
                           std::span<const TripleMapping> mappings) {
  struct Row {
    std::string text;
    const TripleMapping* m;
  };
  std::vector<Row> rows;
  rows.reserve(mappings.size());
  for (const auto& m : mappings) {
    Triple a = left.triple(m.left);
    Triple b = right.triple(m.right);
    std::string text = to_ntriples(a.subject) + '\t' + to_ntriples(a.predicate) + '\t' + to_ntriples(a.object) + '\t' +
                       to_ntriples(b.subject) + '\t' + to_ntriples(b.predicate) + '\t' + to_ntriples(b.object);
    rows.push_back(Row{std::move(text), &m});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.text < b.text; });
  out << kTripleHeader << '\n';
  for (const auto& r : rows) {
    out << r.text << '\t' << score(r.m->compat) << '\t' << score(r.m->divergence) << '\t' << to_string(r.m->phase)
        << '\t' << to_string(r.m->classification) << '\n';
  }
}

std::vector<EntityMapping> read_entity_mappings(std::istream& in, const KnowledgeGraph& left,
                                                const KnowledgeGraph& right) {
  std::vector<EntityMapping> out;
  std::string line;
  std::size_t number = 0;
  if (!std::getline(in, line)) throw ParseError(1, 0, "empty entity mapping file");
  ++number;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kEntityHeader) throw ParseError(1, 0, "unexpected entity mapping header");
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto f = split_tabs(line);
    if (f.size() != 5) throw ParseError(number, 0, "expected 5 tab-separated fields");
    if (f[0].empty() || f[1].empty()) throw ParseError(number, 0, "missing IRI");
    auto l = left.find_node(f[0]);
    auto r = right.find_node(f[1]);
    EntityMapping m;
    m.combined = *parse_score(f[2], number, true);
    m.c_label = parse_score(f[3], number, false);
    m.c_triple = parse_score(f[4], number, false);
    if (!l || !r) continue;
    m.left = *l;
    m.right = *r;
    out.push_back(m);
  }
  return out;
}

}  // namespace ftm
