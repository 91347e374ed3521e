#include "ftm/graph.hpp"

#include <algorithm>
#include <cstdio>

#include "ftm/error.hpp"

namespace ftm {

namespace {

std::uint64_t object_key(const ObjectRef& o) {
  return (static_cast<std::uint64_t>(o.is_literal) << 32) | o.id;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string literal_identity_key(const LiteralValue& value) {
  std::string key = value.raw;
  key.push_back('\x1f');
  if (value.datatype) key.append(value.datatype->str());
  key.push_back('\x1f');
  if (value.language) key.append(*value.language);
  return key;
}

std::vector<Iri> default_label_predicates() {
  return {Iri(std::string(vocab::kRdfsLabel)), Iri(std::string(vocab::kSkosAltLabel)),
          Iri(std::string(vocab::kSkosPrefLabel))};
}

std::string fallback_label(std::string_view iri) {
  std::string_view s = iri;
  while (s.size() > 1 && (s.back() == '/' || s.back() == '#')) s.remove_suffix(1);
  if (s.substr(0, 2) == "_:") s.remove_prefix(2);
  std::size_t cut = s.find_last_of("#/");
  if (cut == std::string_view::npos) cut = s.find_last_of(':');
  std::string_view local = cut == std::string_view::npos ? s : s.substr(cut + 1);
  if (local.empty()) local = s;

  std::string out;
  out.reserve(local.size());
  for (std::size_t i = 0; i < local.size(); ++i) {
    char c = local[i];
    if (c == '%' && i + 2 < local.size()) {
      int hi = hex_value(local[i + 1]);
      int lo = hex_value(local[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
        continue;
      }
    }
    out.push_back(c == '_' ? ' ' : c);
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// KnowledgeGraph

KnowledgeGraph::KnowledgeGraph() : KnowledgeGraph(GraphParts{}) {}

KnowledgeGraph::KnowledgeGraph(GraphParts parts)
    : iris_(std::move(parts.iris)),
      literals_(std::move(parts.literals)),
      triples_(std::move(parts.triples)),
      labels_(std::move(parts.labels)) {
  iri_lookup_.reserve(iris_.size());
  for (NodeId i = 0; i < iris_.size(); ++i) iri_lookup_.emplace(iris_[i], i);
  literal_lookup_.reserve(literals_.size());
  for (LiteralId i = 0; i < literals_.size(); ++i) literal_lookup_.emplace(literal_identity_key(literals_[i]), i);

  for (const auto& t : triples_) {
    bool bad = t.subject >= iris_.size() || t.predicate >= iris_.size() ||
               (t.object.is_literal ? t.object.id >= literals_.size() : t.object.id >= iris_.size());
    if (bad) throw ContractViolation("triple references a term outside the dictionary");
  }

  labels_.resize(iris_.size());
  for (NodeId i = 0; i < iris_.size(); ++i) {
    if (labels_[i].empty()) labels_[i].push_back(fallback_label(iris_[i]));
  }

  roles_.assign(iris_.size(), 0);
  for (const auto& t : triples_) {
    roles_[t.subject] |= kEntityRole;
    roles_[t.predicate] |= kPredicateRole;
    if (!t.object.is_literal) roles_[t.object.id] |= kEntityRole;
  }
  for (NodeId i = 0; i < iris_.size(); ++i) {
    if (roles_[i] & kEntityRole) entities_.push_back(i);
    if (roles_[i] & kPredicateRole) predicates_.push_back(i);
  }

  build_indexes();
  if (parts.stats.empty()) {
    derive_stats();
  } else {
    for (auto& s : parts.stats) {
      auto id = find_node(s.predicate.str());
      if (!id || !is_predicate(*id)) throw ContractViolation("statistics for unknown predicate " + s.predicate.str());
      stats_.emplace(*id, std::move(s));
    }
    if (stats_.size() != predicates_.size()) throw ContractViolation("statistics do not cover every predicate");
  }
}

std::span<const TripleId> KnowledgeGraph::Csr::row(std::size_t key) const {
  if (key + 1 >= offsets.size()) return {};
  return std::span<const TripleId>(ids.data() + offsets[key], offsets[key + 1] - offsets[key]);
}

void KnowledgeGraph::build_indexes() {
  auto build = [this](Csr& csr, std::size_t keys, auto key_of) {
    csr.offsets.assign(keys + 1, 0);
    for (TripleId t = 0; t < triples_.size(); ++t) {
      if (auto k = key_of(triples_[t])) ++csr.offsets[*k + 1];
    }
    for (std::size_t k = 0; k < keys; ++k) csr.offsets[k + 1] += csr.offsets[k];
    csr.ids.resize(csr.offsets[keys]);
    std::vector<std::uint32_t> cursor(csr.offsets.begin(), csr.offsets.end() - 1);
    for (TripleId t = 0; t < triples_.size(); ++t) {
      if (auto k = key_of(triples_[t])) csr.ids[cursor[*k]++] = t;
    }
  };
  build(by_subject_, iris_.size(), [](const TripleRecord& r) { return std::optional<std::size_t>(r.subject); });
  build(by_object_, iris_.size(), [](const TripleRecord& r) {
    return r.object.is_literal ? std::nullopt : std::optional<std::size_t>(r.object.id);
  });
  build(by_literal_, literals_.size(), [](const TripleRecord& r) {
    return r.object.is_literal ? std::optional<std::size_t>(r.object.id) : std::nullopt;
  });
}

void KnowledgeGraph::derive_stats() {
  std::unordered_map<NodeId, std::vector<TripleId>> by_predicate;
  for (TripleId t = 0; t < triples_.size(); ++t) by_predicate[triples_[t].predicate].push_back(t);
  for (NodeId p : predicates_) {
    const auto& ids = by_predicate[p];
    std::vector<NodeId> subjects;
    std::vector<std::uint64_t> objects;
    subjects.reserve(ids.size());
    objects.reserve(ids.size());
    for (TripleId t : ids) {
      subjects.push_back(triples_[t].subject);
      objects.push_back(object_key(triples_[t].object));
    }
    std::sort(subjects.begin(), subjects.end());
    std::sort(objects.begin(), objects.end());
    PredicateStats s{Iri(iris_[p])};
    s.triple_count = ids.size();
    s.distinct_subjects = static_cast<std::uint64_t>(std::unique(subjects.begin(), subjects.end()) - subjects.begin());
    s.distinct_objects = static_cast<std::uint64_t>(std::unique(objects.begin(), objects.end()) - objects.begin());
    const double n = static_cast<double>(s.triple_count);
    s.functionality = static_cast<double>(s.distinct_subjects) / n;
    s.inverse_functionality = static_cast<double>(s.distinct_objects) / n;
    s.unique_ratio = static_cast<double>(s.distinct_objects) / n;
    stats_.emplace(p, std::move(s));
  }
}

Triple KnowledgeGraph::triple(TripleId id) const {
  const auto& r = triples_[id];
  return Triple{Iri(iris_[r.subject]), Iri(iris_[r.predicate]), object_term(r.object)};
}

Term KnowledgeGraph::object_term(const ObjectRef& object) const {
  if (object.is_literal) return literals_[object.id];
  return Iri(iris_[object.id]);
}

std::optional<NodeId> KnowledgeGraph::find_node(std::string_view iri) const {
  auto it = iri_lookup_.find(iri);
  if (it == iri_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<LiteralId> KnowledgeGraph::find_literal(const LiteralValue& value) const {
  auto it = literal_lookup_.find(literal_identity_key(value));
  if (it == literal_lookup_.end()) return std::nullopt;
  return it->second;
}

std::span<const TripleId> KnowledgeGraph::triples_with_subject(NodeId node) const { return by_subject_.row(node); }
std::span<const TripleId> KnowledgeGraph::triples_with_object(NodeId node) const { return by_object_.row(node); }
std::span<const TripleId> KnowledgeGraph::triples_with_literal(LiteralId literal) const {
  return by_literal_.row(literal);
}

const PredicateStats& KnowledgeGraph::stats(NodeId predicate) const {
  auto it = stats_.find(predicate);
  if (it == stats_.end()) throw PredicateAbsent(predicate < iris_.size() ? iris_[predicate] : std::to_string(predicate));
  return it->second;
}

const PredicateStats& KnowledgeGraph::stats(const Iri& predicate) const {
  auto id = find_node(predicate.str());
  if (!id || !is_predicate(*id)) throw PredicateAbsent(predicate.str());
  return stats(*id);
}

std::vector<PredicateStats> KnowledgeGraph::all_stats() const {
  std::vector<PredicateStats> out;
  out.reserve(predicates_.size());
  for (NodeId p : predicates_) out.push_back(stats_.at(p));
  return out;
}

GraphParts KnowledgeGraph::to_parts() const {
  return GraphParts{iris_, literals_, triples_, labels_, all_stats()};
}

double compute_functionality(const KnowledgeGraph& kg, const Iri& predicate) {
  return kg.stats(predicate).functionality;
}

double compute_inverse_functionality(const KnowledgeGraph& kg, const Iri& predicate) {
  return kg.stats(predicate).inverse_functionality;
}

double compute_unique_ratio(const KnowledgeGraph& kg, const Iri& predicate) {
  return kg.stats(predicate).unique_ratio;
}

// ---------------------------------------------------------------------------------------------
// GraphBuilder

std::uint64_t GraphBuilder::hash_record(const TripleRecord& r) noexcept {
  std::uint64_t h = r.subject;
  h = h * 0x9E3779B97F4A7C15ULL ^ r.predicate;
  h = h * 0x9E3779B97F4A7C15ULL ^ object_key(r.object);
  h ^= h >> 31;
  h *= 0xBF58476D1CE4E5B9ULL;
  return h ^ (h >> 29);
}

bool GraphBuilder::insert_unique(const TripleRecord& r) {
  if ((triples_.size() + 1) * 2 > slots_.size()) {
    std::vector<std::uint32_t> grown(std::max<std::size_t>(16, slots_.size() * 2), 0);
    const std::size_t mask = grown.size() - 1;
    for (std::uint32_t i = 0; i < triples_.size(); ++i) {
      std::size_t pos = hash_record(triples_[i]) & mask;
      while (grown[pos] != 0) pos = (pos + 1) & mask;
      grown[pos] = i + 1;
    }
    slots_ = std::move(grown);
  }
  const std::size_t mask = slots_.size() - 1;
  std::size_t pos = hash_record(r) & mask;
  while (slots_[pos] != 0) {
    if (triples_[slots_[pos] - 1] == r) return false;
    pos = (pos + 1) & mask;
  }
  slots_[pos] = static_cast<std::uint32_t>(triples_.size()) + 1;
  triples_.push_back(r);
  return true;
}

GraphBuilder::GraphBuilder(std::vector<Iri> label_predicates) {
  for (auto& p : label_predicates) label_predicates_.insert(p.str());
}

NodeId GraphBuilder::intern_iri(std::string_view iri) {
  auto it = iri_lookup_.find(std::string(iri));
  if (it != iri_lookup_.end()) return it->second;
  const auto id = static_cast<NodeId>(iris_.size());
  iris_.emplace_back(iri);
  iri_lookup_.emplace(iris_.back(), id);
  return id;
}

LiteralId GraphBuilder::intern_literal(const LiteralValue& value) {
  std::string key = literal_identity_key(value);
  auto it = literal_lookup_.find(key);
  if (it != literal_lookup_.end()) return it->second;
  const auto id = static_cast<LiteralId>(literals_.size());
  literals_.push_back(value);
  literal_lookup_.emplace(std::move(key), id);
  return id;
}

bool GraphBuilder::add(const Triple& triple) {
  return add(triple.subject.str(), triple.predicate.str(), triple.object);
}

bool GraphBuilder::add(std::string_view subject, std::string_view predicate, const Term& object) {
  TripleRecord r;
  r.subject = intern_iri(subject);
  r.predicate = intern_iri(predicate);
  if (const auto* lit = std::get_if<LiteralValue>(&object)) {
    r.object = ObjectRef{true, intern_literal(*lit)};
  } else {
    r.object = ObjectRef{false, intern_iri(std::get<Iri>(object).str())};
  }
  if (!insert_unique(r)) return false;
  if (r.object.is_literal && label_predicates_.count(iris_[r.predicate])) {
    explicit_labels_[r.subject].push_back(literals_[r.object.id].raw);
  }
  return true;
}

KnowledgeGraph GraphBuilder::build() && {
  GraphParts parts;
  parts.labels.resize(iris_.size());
  for (auto& [node, labels] : explicit_labels_) {
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    parts.labels[node] = std::move(labels);
  }
  parts.iris = std::move(iris_);
  parts.literals = std::move(literals_);
  parts.triples = std::move(triples_);
  slots_ = {};
  iri_lookup_.clear();
  literal_lookup_.clear();
  return KnowledgeGraph(std::move(parts));
}

// ---------------------------------------------------------------------------------------------
// N-Triples rendering

std::string escape_ntriples_string(std::string_view text) {
  std::string out;
  out.reserve(text.size() + 2);
  for (char c : text) {
    switch (c) {
      case '\\':
        out += "\\\\";
        break;
      case '"':
        out += "\\\"";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\r':
        out += "\\r";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04X", static_cast<unsigned>(static_cast<unsigned char>(c)));
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  return out;
}

std::string to_ntriples(const Term& term) {
  if (const auto* iri = std::get_if<Iri>(&term)) {
    if (iri->str().rfind("_:", 0) == 0) return iri->str();
    return "<" + iri->str() + ">";
  }
  const auto& lit = std::get<LiteralValue>(term);
  std::string out = "\"" + escape_ntriples_string(lit.raw) + "\"";
  if (lit.language) {
    out += "@" + *lit.language;
  } else if (lit.datatype) {
    out += "^^<" + lit.datatype->str() + ">";
  }
  return out;
}

}  // namespace ftm
