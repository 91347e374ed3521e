#include "ftm/triple_matcher.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <unordered_set>

#include "ftm/error.hpp"
#include "ftm/parallel.hpp"

namespace ftm {

const char* to_string(Phase phase) {
  switch (phase) {
    case Phase::ExactAttribute:
      return "exact_attribute";
    case Phase::Inbound:
      return "inbound";
    case Phase::Outbound:
      return "outbound";
  }
  return "exact_attribute";
}

const char* to_string(Classification classification) {
  switch (classification) {
    case Classification::Compatible:
      return "compatible";
    case Classification::Divergent:
      return "divergent";
    case Classification::Undecided:
      return "undecided";
  }
  return "undecided";
}

const char* to_string(StopReason reason) {
  return reason == StopReason::Converged ? "converged" : "max_iterations";
}

Phase parse_phase(std::string_view name) {
  for (Phase p : {Phase::ExactAttribute, Phase::Inbound, Phase::Outbound})
    if (name == to_string(p)) return p;
  throw ContractViolation("unknown phase: " + std::string(name));
}

Classification parse_classification(std::string_view name) {
  for (Classification c : {Classification::Compatible, Classification::Divergent, Classification::Undecided})
    if (name == to_string(c)) return c;
  throw ContractViolation("unknown classification: " + std::string(name));
}

namespace {

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw ContractViolation(std::string(name) + " outside [0,1]: " + std::to_string(v));
}

double noisy_or(double a, double b) { return 1.0 - (1.0 - a) * (1.0 - b); }

}  // namespace

double triple_similarity(double ent, double pred, double fun1, double fun2, double inv1, double inv2, double obj) {
  check_unit(ent, "entity similarity");
  check_unit(pred, "predicate similarity");
  check_unit(fun1, "functionality");
  check_unit(fun2, "functionality");
  check_unit(inv1, "inverse functionality");
  check_unit(inv2, "inverse functionality");
  check_unit(obj, "object similarity");
  const double base = ent * pred;
  return noisy_or(base * fun1 * fun2 * obj, base * inv1 * inv2 * obj);
}

double triple_divergence(double ent, double pred, double fun1, double fun2, double inv1, double inv2, double obj) {
  check_unit(obj, "object similarity");
  return triple_similarity(ent, pred, fun1, fun2, inv1, inv2, 1.0 - obj);
}

double entity_similarity_from_triples(std::span<const double> compat) {
  double log_rest = 0.0;
  for (double c : compat) {
    check_unit(c, "triple compatibility");
    if (c == 1.0) return 1.0;
    log_rest += std::log1p(-c);
  }
  return -std::expm1(log_rest);
}

double combine_entity_similarity(std::optional<double> c_label, std::optional<double> c_triple,
                                 std::optional<double> embedding_sim) {
  if (c_label && c_triple) return (*c_label + *c_triple) / 2.0;
  if (c_label) return 0.5 * *c_label;
  if (c_triple) {
    if (!embedding_sim) throw ContractViolation("triple-only entity pair needs a label similarity");
    return (*embedding_sim + *c_triple) / 2.0;
  }
  throw ContractViolation("entity pair has neither label nor triple confidence");
}

Classification classify(double compat, std::optional<double> divergence, const Thresholds& thresholds) {
  if (compat >= thresholds.compatible) return Classification::Compatible;
  if (divergence && *divergence >= thresholds.divergent) return Classification::Divergent;
  return Classification::Undecided;
}

PredicateMap::PredicateMap(std::span<const LabelMatch> mappings) {
  for (const auto& m : mappings) {
    auto [it, fresh] = map_.emplace(pair_key(m.left, m.right), m.confidence);
    if (!fresh) it->second = std::max(it->second, m.confidence);
  }
}

std::optional<double> PredicateMap::confidence(NodeId left, NodeId right) const {
  auto it = map_.find(pair_key(left, right));
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

void EntityScores::set(NodeId left, NodeId right, double score) { scores_[pair_key(left, right)] = score; }

double EntityScores::get(NodeId left, NodeId right) const {
  auto it = scores_.find(pair_key(left, right));
  return it == scores_.end() ? kDefaultEntityScore : it->second;
}

std::optional<double> EntityScores::find(NodeId left, NodeId right) const {
  auto it = scores_.find(pair_key(left, right));
  if (it == scores_.end()) return std::nullopt;
  return it->second;
}

void EntityScores::finalize() {
  ranked_.clear();
  for (const auto& [key, score] : scores_) ranked_[key_left(key)].emplace_back(key_right(key), score);
  sources_.clear();
  sources_.reserve(ranked_.size());
  for (auto& [left, list] : ranked_) {
    std::sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    sources_.push_back(left);
  }
  std::sort(sources_.begin(), sources_.end());
}

std::span<const std::pair<NodeId, double>> EntityScores::top_k(NodeId left, std::size_t k) const {
  auto it = ranked_.find(left);
  if (it == ranked_.end() || k == 0) return {};
  const auto& list = it->second;
  std::size_t n = std::min(k, list.size());
  while (n < list.size() && list[n].second == list[n - 1].second) ++n;
  return std::span<const std::pair<NodeId, double>>(list.data(), n);
}

std::optional<NodeId> EntityScores::argmax(NodeId left) const {
  auto it = ranked_.find(left);
  if (it == ranked_.end() || it->second.empty()) return std::nullopt;
  return it->second.front().first;
}

namespace {

void cache_stats(const KnowledgeGraph& kg, std::vector<double>& fun, std::vector<double>& inv) {
  fun.assign(kg.node_count(), 0.0);
  inv.assign(kg.node_count(), 0.0);
  for (NodeId p : kg.predicates()) {
    const auto& st = kg.stats(p);
    fun[p] = st.functionality;
    inv[p] = st.inverse_functionality;
  }
}

}  // namespace

MatchContext::MatchContext(const KnowledgeGraph& left, const KnowledgeGraph& right, PredicateMap predicates,
                           const CategoricalOptions& categorical)
    : left_(left),
      right_(right),
      predicates_(std::move(predicates)),
      left_domains_(detect_categoricals(left, categorical)),
      right_domains_(detect_categoricals(right, categorical)) {
  cache_stats(left_, left_fun_, left_inv_);
  cache_stats(right_, right_fun_, right_inv_);
}

double MatchContext::object_score(const TripleRecord& l, const TripleRecord& r, const EntityScores& scores) const {
  SimilarityContext sim{[&scores](NodeId a, NodeId b) { return scores.get(a, b); }};
  return object_similarity(resolve_object(left_, l, left_domains_), resolve_object(right_, r, right_domains_), sim);
}

std::vector<TripleMapping> exact_attribute_phase(const MatchContext& ctx, const EntityScores& scores,
                                                 const CommonLiteralSet& common, std::size_t literal_cap,
                                                 std::size_t threads) {
  const auto& L = ctx.left();
  const auto& R = ctx.right();
  return parallel_collect<TripleMapping>(common.values.size(), threads, [&](std::size_t i, auto& out) {
    const auto& value = common.values[i];
    std::vector<TripleId> lt, rt;
    for (LiteralId id : value.left_ids) {
      auto s = L.triples_with_literal(id);
      lt.insert(lt.end(), s.begin(), s.end());
    }
    for (LiteralId id : value.right_ids) {
      auto s = R.triples_with_literal(id);
      rt.insert(rt.end(), s.begin(), s.end());
    }
    if (lt.size() > literal_cap || rt.size() > literal_cap) return;
    std::sort(lt.begin(), lt.end());
    std::sort(rt.begin(), rt.end());
    for (TripleId a : lt) {
      const auto& t1 = L.record(a);
      for (TripleId b : rt) {
        const auto& t2 = R.record(b);
        auto pred = ctx.predicates().confidence(t1.predicate, t2.predicate);
        if (!pred) continue;
        double compat = triple_similarity(scores.get(t1.subject, t2.subject), *pred, ctx.left_fun(t1.predicate),
                                          ctx.right_fun(t2.predicate), ctx.left_inv(t1.predicate),
                                          ctx.right_inv(t2.predicate), 1.0);
        out.push_back(TripleMapping{a, b, compat, std::nullopt, Phase::ExactAttribute, 0, Classification::Undecided});
      }
    }
  });
}

std::vector<TripleMapping> inbound_phase(const MatchContext& ctx, const EntityScores& scores, std::size_t k,
                                         std::size_t threads) {
  const auto& L = ctx.left();
  const auto& R = ctx.right();
  const auto& sources = scores.sources();
  return parallel_collect<TripleMapping>(sources.size(), threads, [&](std::size_t i, auto& out) {
    const NodeId e1 = sources[i];
    if (e1 >= L.node_count()) return;
    auto in1 = L.triples_with_object(e1);
    if (in1.empty()) return;
    for (const auto& [e2, ent] : scores.top_k(e1, k)) {
      if (e2 >= R.node_count()) continue;
      auto in2 = R.triples_with_object(e2);
      for (TripleId a : in1) {
        const auto& t1 = L.record(a);
        for (TripleId b : in2) {
          const auto& t2 = R.record(b);
          auto pred = ctx.predicates().confidence(t1.predicate, t2.predicate);
          if (!pred) continue;
          double compat = triple_similarity(ent, *pred, ctx.left_fun(t1.predicate), ctx.right_fun(t2.predicate),
                                            ctx.left_inv(t1.predicate), ctx.right_inv(t2.predicate),
                                            scores.get(t1.subject, t2.subject));
          out.push_back(TripleMapping{a, b, compat, std::nullopt, Phase::Inbound, 0, Classification::Undecided});
        }
      }
    }
  });
}

std::vector<TripleMapping> outbound_phase(const MatchContext& ctx, const EntityScores& scores, std::size_t k,
                                          std::size_t threads) {
  const auto& L = ctx.left();
  const auto& R = ctx.right();
  const auto& sources = scores.sources();
  return parallel_collect<TripleMapping>(sources.size(), threads, [&](std::size_t i, auto& out) {
    const NodeId e1 = sources[i];
    if (e1 >= L.node_count()) return;
    auto out1 = L.triples_with_subject(e1);
    if (out1.empty()) return;
    for (const auto& [e2, ent] : scores.top_k(e1, k)) {
      if (e2 >= R.node_count()) continue;
      auto out2 = R.triples_with_subject(e2);
      for (TripleId a : out1) {
        const auto& t1 = L.record(a);
        for (TripleId b : out2) {
          const auto& t2 = R.record(b);
          auto pred = ctx.predicates().confidence(t1.predicate, t2.predicate);
          if (!pred) continue;
          double compat = triple_similarity(ent, *pred, ctx.left_fun(t1.predicate), ctx.right_fun(t2.predicate),
                                            ctx.left_inv(t1.predicate), ctx.right_inv(t2.predicate),
                                            ctx.object_score(t1, t2, scores));
          out.push_back(TripleMapping{a, b, compat, std::nullopt, Phase::Outbound, 0, Classification::Undecided});
        }
      }
    }
  });
}

EntityScores PipelineResult::scores() const {
  EntityScores s;
  for (const auto& m : entities) s.set(m.left, m.right, m.combined);
  s.finalize();
  return s;
}

namespace {

// Label similarity for pairs that only have triple evidence. Embeddings are cached per label.
class LabelSimilarity {
 public:
  LabelSimilarity(const KnowledgeGraph& left, const KnowledgeGraph& right, EmbeddingProvider* embedder)
      : left_(left), right_(right), embedder_(embedder) {}

  // Embeds, in one batch, every label of the given pairs not seen before.
  void prepare(const std::vector<std::uint64_t>& pairs) {
    if (!embedder_) return;
    std::vector<std::string> missing;
    std::unordered_set<std::string> queued;
    auto want = [&](std::span<const std::string> labels) {
      for (const auto& l : labels)
        if (!cache_.count(l) && queued.insert(l).second) missing.push_back(l);
    };
    for (auto key : pairs) {
      want(left_.labels(key_left(key)));
      want(right_.labels(key_right(key)));
    }
    if (missing.empty()) return;
    auto vectors = embedder_->embed_batch(missing);
    for (std::size_t i = 0; i < missing.size(); ++i) cache_.emplace(missing[i], std::move(vectors[i]));
  }

  double operator()(NodeId l, NodeId r) const {
    double best = 0.0;
    for (const auto& a : left_.labels(l)) {
      for (const auto& b : right_.labels(r)) {
        double s = embedder_ ? label_cosine(cache_.at(a), cache_.at(b)) : fuzzy_similarity(a, b);
        best = std::max(best, s);
      }
    }
    return best;
  }

 private:
  const KnowledgeGraph& left_;
  const KnowledgeGraph& right_;
  EmbeddingProvider* embedder_;
  std::unordered_map<std::string, EmbeddingVector> cache_;
};

struct Combined {
  std::vector<EntityMapping> mappings;  // sorted by (left, right)
  EntityScores scores;
};

Combined combine_all(const std::unordered_map<std::uint64_t, double>& label,
                     const std::unordered_map<std::uint64_t, double>& triple, LabelSimilarity& label_sim,
                     std::size_t threads) {
  std::vector<std::uint64_t> keys;
  keys.reserve(label.size() + triple.size());
  for (const auto& [k, v] : label) keys.push_back(k);
  for (const auto& [k, v] : triple)
    if (!label.count(k)) keys.push_back(k);
  std::sort(keys.begin(), keys.end());

  std::vector<std::uint64_t> triple_only;
  for (auto k : keys)
    if (!label.count(k)) triple_only.push_back(k);
  label_sim.prepare(triple_only);

  Combined out;
  out.mappings.resize(keys.size());
  parallel_chunks(keys.size(), threads, resolve_threads(threads) * 4, [&](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) {
      EntityMapping m;
      m.left = key_left(keys[i]);
      m.right = key_right(keys[i]);
      if (auto it = label.find(keys[i]); it != label.end()) m.c_label = it->second;
      if (auto it = triple.find(keys[i]); it != triple.end()) m.c_triple = it->second;
      std::optional<double> fallback;
      if (!m.c_label) fallback = label_sim(m.left, m.right);
      m.combined = combine_entity_similarity(m.c_label, m.c_triple, fallback);
      out.mappings[i] = m;
    }
  });
  for (const auto& m : out.mappings) out.scores.set(m.left, m.right, m.combined);
  out.scores.finalize();
  return out;
}

// Triple evidence per entity pair: subject pairs always, object pairs when both objects are IRIs.
std::unordered_map<std::uint64_t, double> triple_confidences(const KnowledgeGraph& L, const KnowledgeGraph& R,
                                                             const std::vector<TripleMapping>& mappings) {
  std::vector<std::pair<std::uint64_t, double>> contributions;
  contributions.reserve(mappings.size() * 2);
  for (const auto& m : mappings) {
    const auto& t1 = L.record(m.left);
    const auto& t2 = R.record(m.right);
    contributions.emplace_back(pair_key(t1.subject, t2.subject), m.compat);
    if (!t1.object.is_literal && !t2.object.is_literal)
      contributions.emplace_back(pair_key(t1.object.id, t2.object.id), m.compat);
  }
  // Stable: `mappings` is sorted, so each pair accumulates in a fixed order.
  std::stable_sort(contributions.begin(), contributions.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::unordered_map<std::uint64_t, double> out;
  std::vector<double> values;
  for (std::size_t i = 0; i < contributions.size();) {
    std::size_t j = i;
    values.clear();
    while (j < contributions.size() && contributions[j].first == contributions[i].first)
      values.push_back(contributions[j++].second);
    out.emplace(contributions[i].first, entity_similarity_from_triples(values));
    i = j;
  }
  return out;
}

}  // namespace

PipelineResult run_pipeline(const KnowledgeGraph& left, const KnowledgeGraph& right, const LabelMappings& labels,
                            const PipelineConfig& config) {
  if (config.max_iterations < 1 || config.max_iterations > 10)
    throw ContractViolation("max_iterations must be in [1,10]");
  const std::size_t threads = resolve_threads(config.threads);
  MatchContext ctx(left, right, PredicateMap(labels.predicates), config.categorical);
  const CommonLiteralSet common = common_literals(left, right);
  LabelSimilarity label_sim(left, right, config.embedder);

  std::unordered_map<std::uint64_t, double> label_conf;
  for (const auto& m : labels.entities) label_conf[pair_key(m.left, m.right)] = m.confidence;
  std::unordered_map<std::uint64_t, double> triple_conf;

  PipelineResult result;
  result.warnings = labels.warnings;
  Combined current = combine_all(label_conf, triple_conf, label_sim, threads);
  std::unordered_map<std::uint64_t, TripleMapping> triples;

  result.stop_reason = StopReason::MaxIterations;
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    const auto started = std::chrono::steady_clock::now();
    IterationRecord rec;
    rec.iteration = iter;

    auto exact = exact_attribute_phase(ctx, current.scores, common, config.common_literal_cap, threads);
    auto inbound = inbound_phase(ctx, current.scores, config.k_top, threads);
    auto outbound = outbound_phase(ctx, current.scores, config.k_top, threads);
    rec.exact_attribute = exact.size();
    rec.inbound = inbound.size();
    rec.outbound = outbound.size();

    // Within an iteration the highest compat over phases wins; a later iteration replaces the
    // value of any pair it scores again.
    std::unordered_map<std::uint64_t, TripleMapping> fresh;
    for (auto* phase : {&exact, &inbound, &outbound}) {
      for (auto& m : *phase) {
        m.iteration = iter;
        auto [it, inserted] = fresh.emplace(pair_key(m.left, m.right), m);
        if (!inserted && m.compat > it->second.compat) it->second = m;
      }
    }
    for (auto& [key, m] : fresh) triples[key] = m;

    std::vector<TripleMapping> sorted;
    sorted.reserve(triples.size());
    for (const auto& [key, m] : triples) sorted.push_back(m);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.left != b.left ? a.left < b.left : a.right < b.right; });
    triple_conf = triple_confidences(left, right, sorted);

    Combined next = combine_all(label_conf, triple_conf, label_sim, threads);
    const double before = static_cast<double>(current.scores.sources().size());
    const double after = static_cast<double>(next.scores.sources().size());
    rec.growth = before == 0.0 ? (after > 0.0 ? 1.0 : 0.0) : (after - before) / before;
    std::size_t changed = 0;
    for (NodeId s : current.scores.sources())
      if (next.scores.argmax(s) != current.scores.argmax(s)) ++changed;
    rec.shift = before == 0.0 ? 0.0 : static_cast<double>(changed) / before;
    rec.triple_mappings = triples.size();
    rec.entity_pairs = next.scores.size();
    rec.matched_sources = next.scores.sources().size();
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.history.push_back(rec);
    current = std::move(next);

    if (!(rec.growth > config.growth_threshold || rec.shift > config.shift_threshold)) {
      result.stop_reason = StopReason::Converged;
      break;
    }
  }

  result.entities = std::move(current.mappings);
  result.triples.reserve(triples.size());
  for (auto& [key, m] : triples) {
    m.classification = classify(m.compat, std::nullopt, config.thresholds);
    result.triples.push_back(m);
  }
  std::sort(result.triples.begin(), result.triples.end(),
            [](const auto& a, const auto& b) { return a.left != b.left ? a.left < b.left : a.right < b.right; });
  return result;
}

std::vector<TripleMapping> compute_divergences(const KnowledgeGraph& left, const KnowledgeGraph& right,
                                               const EntityScores& scores, const PredicateMap& predicates,
                                               const DivergenceOptions& options) {
  MatchContext ctx(left, right, predicates, options.categorical);
  const auto& sources = scores.sources();
  return parallel_collect<TripleMapping>(sources.size(), options.threads, [&](std::size_t i, auto& out) {
    const NodeId e1 = sources[i];
    auto best = scores.argmax(e1);
    if (!best || e1 >= left.node_count() || *best >= right.node_count()) return;
    const double ent = scores.get(e1, *best);
    for (TripleId a : left.triples_with_subject(e1)) {
      const auto& t1 = left.record(a);
      for (TripleId b : right.triples_with_subject(*best)) {
        const auto& t2 = right.record(b);
        auto pred = predicates.confidence(t1.predicate, t2.predicate);
        if (!pred) continue;
        const double f1 = ctx.left_fun(t1.predicate), f2 = ctx.right_fun(t2.predicate);
        const double i1 = ctx.left_inv(t1.predicate), i2 = ctx.right_inv(t2.predicate);
        const double obj = ctx.object_score(t1, t2, scores);
        TripleMapping m{a, b, triple_similarity(ent, *pred, f1, f2, i1, i2, obj),
                        triple_divergence(ent, *pred, f1, f2, i1, i2, obj), Phase::Outbound, 0,
                        Classification::Undecided};
        m.classification = classify(m.compat, m.divergence, options.thresholds);
        out.push_back(m);
      }
    }
  });
}

}  // namespace ftm
