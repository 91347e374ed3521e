#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "ftm/error.hpp"
#include "ftm/triple_matcher.hpp"
#include "oracles.hpp"
#include "planted.hpp"
#include "support.hpp"

namespace ftm {
namespace {

using test::oracle_similarity;

TEST(TripleSimilarity, HighFunctionalityExample) {
  double v = triple_similarity(0.9, 1.0, 0.79, 0.84, 0.16, 0.20, 0.5);
  EXPECT_NEAR(v, 0.30871987199999995, 1e-12);
  EXPECT_NEAR(v, 0.30, 0.02);
  EXPECT_NEAR(0.9 * 1.0 * 0.79 * 0.84 * 0.5, 0.29, 0.01);
  EXPECT_NEAR(0.9 * 1.0 * 0.16 * 0.20 * 0.5, 0.01, 0.005);
}

TEST(TripleSimilarity, LowFunctionalityExample) {
  double t1 = triple_similarity(0.5, 0.9, 0.26, 0.24, 0.33, 0.30, 0.9);
  double t2 = triple_similarity(0.5, 0.9, 0.26, 0.24, 0.33, 0.30, 0.8);
  EXPECT_NEAR(t1, 0.06435371915999999, 1e-12);
  EXPECT_NEAR(t1, 0.07, 0.02);
  EXPECT_NEAR(t2, 0.07, 0.02);
  EXPECT_DOUBLE_EQ(triple_similarity(0.5, 0.9, 0.26, 0.24, 0.33, 0.30, 0.0), 0.0);
}

TEST(TripleSimilarity, ExactAttributeExample) {
  // Objects are identical, so the object term is 1.
  EXPECT_NEAR(triple_similarity(0.9, 0.9, 0.9, 0.9, 0.3, 0.3, 1.0), 0.68117031, 1e-8);
}

TEST(TripleSimilarity, RejectsArgumentsOutsideUnitInterval) {
  EXPECT_THROW(triple_similarity(1.1, 1, 1, 1, 1, 1, 1), ContractViolation);
  EXPECT_THROW(triple_similarity(1, -0.1, 1, 1, 1, 1, 1), ContractViolation);
  EXPECT_THROW(triple_similarity(1, 1, 1, 1, 1, 1, std::nan("")), ContractViolation);
  EXPECT_THROW(triple_divergence(1, 1, 1, 1, 1, 2, 0), ContractViolation);
  EXPECT_THROW(triple_divergence(1, 1, 1, 1, 1, 1, 1.5), ContractViolation);
}

TEST(TripleDivergence, Examples) {
  EXPECT_DOUBLE_EQ(triple_divergence(0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(triple_divergence(1, 1, 1, 1, 0, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(triple_divergence(0.9, 1.0, 0.79, 0.84, 0.16, 0.20, 0.5),
                   triple_similarity(0.9, 1.0, 0.79, 0.84, 0.16, 0.20, 0.5));
}

TEST(TripleSimilarity, MonotoneInEveryArgumentAndBounded) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20000; ++trial) {
    std::array<double, 7> x;
    for (auto& v : x) v = u(rng);
    auto sim = [](const std::array<double, 7>& a) { return triple_similarity(a[0], a[1], a[2], a[3], a[4], a[5], a[6]); };
    auto div = [](const std::array<double, 7>& a) { return triple_divergence(a[0], a[1], a[2], a[3], a[4], a[5], a[6]); };
    const double s = sim(x), d = div(x);
    ASSERT_NEAR(s, oracle_similarity(x[0], x[1], x[2], x[3], x[4], x[5], x[6]), 1e-15);
    const double pf = x[0] * x[1] * x[2] * x[3] * x[6], pi = x[0] * x[1] * x[4] * x[5] * x[6];
    ASSERT_GE(s, std::max(pf, pi) - 1e-15);
    ASSERT_LE(s, std::min(1.0, pf + pi) + 1e-15);
    for (int i = 0; i < 7; ++i) {
      auto y = x;
      y[i] = x[i] + (1.0 - x[i]) * u(rng);
      ASSERT_GE(sim(y), s - 1e-15) << "argument " << i;
      if (i == 6)
        ASSERT_LE(div(y), d + 1e-15);
      else
        ASSERT_GE(div(y), d - 1e-15) << "argument " << i;
    }
  }
}

TEST(EntitySimilarityFromTriples, Examples) {
  std::vector<double> one = {0.30};
  EXPECT_NEAR(entity_similarity_from_triples(one), 0.30, 1e-15);
  std::vector<double> two = {0.07, 0.07};
  EXPECT_NEAR(entity_similarity_from_triples(two), 0.1351, 1e-12);
  EXPECT_NEAR(entity_similarity_from_triples(two), 0.135, 0.01);
  std::vector<double> ten(10, 0.07);
  EXPECT_NEAR(entity_similarity_from_triples(ten), 0.5160176928207065, 1e-12);
  EXPECT_NEAR(entity_similarity_from_triples(ten), 0.516, 0.01);
  EXPECT_EQ(entity_similarity_from_triples({}), 0.0);
  std::vector<double> saturated = {0.2, 1.0, 0.3};
  EXPECT_EQ(entity_similarity_from_triples(saturated), 1.0);
  std::vector<double> bad = {0.2, 1.2};
  EXPECT_THROW(entity_similarity_from_triples(bad), ContractViolation);
}

TEST(EntitySimilarityFromTriples, LogSpaceMatchesDirectProduct) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> len(0, 64);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> c(len(rng));
    for (auto& v : c) v = u(rng);
    double prod = 1.0;
    for (double v : c) prod *= 1.0 - v;
    ASSERT_NEAR(entity_similarity_from_triples(c), 1.0 - prod, 1e-9);
  }
}

TEST(CombineEntitySimilarity, Examples) {
  EXPECT_DOUBLE_EQ(combine_entity_similarity(0.52, 0.30), 0.41);
  EXPECT_DOUBLE_EQ(combine_entity_similarity(0.8, std::nullopt), 0.40);
  EXPECT_DOUBLE_EQ(combine_entity_similarity(std::nullopt, 0.6, 0.4), 0.50);
  EXPECT_THROW(combine_entity_similarity(std::nullopt, std::nullopt), ContractViolation);
  EXPECT_THROW(combine_entity_similarity(std::nullopt, 0.6), ContractViolation);
}

TEST(Classify, Thresholds) {
  Thresholds t;
  EXPECT_EQ(classify(0.60, 0.9, t), Classification::Compatible);
  EXPECT_EQ(classify(0.59, 0.25, t), Classification::Divergent);
  EXPECT_EQ(classify(0.59, 0.24, t), Classification::Undecided);
  EXPECT_EQ(classify(0.1, std::nullopt, t), Classification::Undecided);
  for (auto c : {Classification::Compatible, Classification::Divergent, Classification::Undecided})
    EXPECT_EQ(parse_classification(to_string(c)), c);
  for (auto p : {Phase::ExactAttribute, Phase::Inbound, Phase::Outbound}) EXPECT_EQ(parse_phase(to_string(p)), p);
}

TEST(EntityScores, TopKIncludesTiesAtTheCutoff) {
  EntityScores s;
  s.set(1, 10, 0.9);
  s.set(1, 11, 0.7);
  s.set(1, 12, 0.7);
  s.set(1, 13, 0.7);
  s.set(1, 14, 0.2);
  s.set(2, 10, 0.4);
  s.finalize();
  EXPECT_EQ(s.sources(), (std::vector<NodeId>{1, 2}));
  EXPECT_EQ(s.top_k(1, 1).size(), 1u);
  auto top2 = s.top_k(1, 2);
  ASSERT_EQ(top2.size(), 4u);
  EXPECT_EQ(top2[1].first, 11u);
  EXPECT_EQ(top2[3].first, 13u);
  EXPECT_EQ(s.top_k(1, 10).size(), 5u);
  EXPECT_EQ(s.argmax(1), 10u);
  EXPECT_FALSE(s.argmax(3));
  EXPECT_DOUBLE_EQ(s.get(5, 5), kDefaultEntityScore);
}

TEST(Phases, MatchBruteForceCrossProductOnRandomGraphs) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto cmp = test::compare_phases_with_cross_product(seed);
    EXPECT_EQ(cmp.mismatched_keys, 0u) << "seed " << seed;
    EXPECT_LE(cmp.max_deviation, 1e-12) << "seed " << seed;
    for (std::size_t n : cmp.expected) EXPECT_GT(n, 0u) << "seed " << seed;
  }
}

TEST(Phases, IndependentOfThreadCount) {
  test::RandomPair g = test::make_random_pair(99, 200);
  test::PhaseFixture f = test::random_phase_state(g, 7);
  MatchContext ctx(g.left, g.right, PredicateMap(f.predicates));
  auto common = common_literals(g.left, g.right);
  auto base = outbound_phase(ctx, f.scores, 10, 1);
  auto base_exact = exact_attribute_phase(ctx, f.scores, common, 1000, 1);
  for (std::size_t threads : {2u, 3u, 8u}) {
    auto other = outbound_phase(ctx, f.scores, 10, threads);
    ASSERT_EQ(other.size(), base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      ASSERT_EQ(other[i].left, base[i].left);
      ASSERT_EQ(other[i].right, base[i].right);
      ASSERT_EQ(other[i].compat, base[i].compat);
    }
    ASSERT_EQ(exact_attribute_phase(ctx, f.scores, common, 1000, threads).size(), base_exact.size());
  }
}

TEST(Phases, EmptyAndUnmappedInputsYieldNothing) {
  auto l = test::graph_from_nt("<http://l/a> <http://l/pages> \"288\" .\n<http://l/x> <http://l/rel> <http://l/a> .\n");
  auto r = test::graph_from_nt("<http://r/a> <http://r/pages> \"288\" .\n<http://r/y> <http://r/other> <http://r/a> .\n");
  EntityScores scores;
  scores.set(*l.find_node("http://l/a"), *r.find_node("http://r/a"), 0.9);
  scores.finalize();
  // No predicate mappings: every phase skips.
  MatchContext none(l, r, PredicateMap{});
  auto common = common_literals(l, r);
  EXPECT_EQ(common.values.size(), 1u);
  EXPECT_TRUE(exact_attribute_phase(none, scores, common, 1000).empty());
  EXPECT_TRUE(inbound_phase(none, scores, 10).empty());
  EXPECT_TRUE(outbound_phase(none, scores, 10).empty());
  // Empty common set.
  std::vector<LabelMatch> preds = {{*l.find_node("http://l/pages"), *r.find_node("http://r/pages"), 0.9, LabelTier::Normalized}};
  MatchContext mapped(l, r, PredicateMap(preds));
  EXPECT_TRUE(exact_attribute_phase(mapped, scores, CommonLiteralSet{}, 1000).empty());
  auto exact = exact_attribute_phase(mapped, scores, common, 1000);
  ASSERT_EQ(exact.size(), 1u);
  // Single-triple predicates are fully functional: 1 - (1 - 0.81)^2.
  EXPECT_NEAR(exact[0].compat, 1.0 - 0.19 * 0.19, 1e-12);
  // The cap excludes the literal.
  EXPECT_TRUE(exact_attribute_phase(mapped, scores, common, 0).empty());
}

TEST(Phases, InboundSaturatesWithPerfectInputs) {
  auto l = test::graph_from_nt("<http://l/s> <http://l/rel> <http://l/a> .\n");
  auto r = test::graph_from_nt("<http://r/s> <http://r/rel> <http://r/a> .\n");
  NodeId la = *l.find_node("http://l/a"), ra = *r.find_node("http://r/a");
  NodeId ls = *l.find_node("http://l/s"), rs = *r.find_node("http://r/s");
  std::vector<LabelMatch> preds = {{*l.find_node("http://l/rel"), *r.find_node("http://r/rel"), 1.0, LabelTier::UriExact}};
  EntityScores scores;
  scores.set(la, ra, 1.0);
  scores.set(ls, rs, 1.0);
  scores.finalize();
  MatchContext ctx(l, r, PredicateMap(preds));
  auto in = inbound_phase(ctx, scores, 10);
  ASSERT_EQ(in.size(), 1u);
  EXPECT_EQ(in[0].compat, 1.0);
  EXPECT_EQ(in[0].phase, Phase::Inbound);
}

TEST(Pipeline, ZeroOverlapStopsAfterOneIteration) {
  auto l = test::graph_from_nt("<http://l/alpha> <http://l/colour> \"crimson\" .\n");
  auto r = test::graph_from_nt("<http://r/omega> <http://r/weight> \"12\" .\n");
  LabelMappings labels;
  labels.entities.push_back({*l.find_node("http://l/alpha"), *r.find_node("http://r/omega"), 0.4, LabelTier::Fuzzy});
  auto result = run_pipeline(l, r, labels);
  ASSERT_EQ(result.history.size(), 1u);
  EXPECT_EQ(result.stop_reason, StopReason::Converged);
  EXPECT_TRUE(result.triples.empty());
  ASSERT_EQ(result.entities.size(), 1u);
  EXPECT_DOUBLE_EQ(result.entities[0].combined, 0.2);
  EXPECT_FALSE(result.entities[0].c_triple);
}

TEST(Pipeline, RejectsIterationCapOutsideRange) {
  auto g = test::graph_from_nt("");
  PipelineConfig c;
  c.max_iterations = 11;
  EXPECT_THROW(run_pipeline(g, g, {}, c), ContractViolation);
  c.max_iterations = 0;
  EXPECT_THROW(run_pipeline(g, g, {}, c), ContractViolation);
}

struct PlantedRun {
  test::PlantedPair pair;
  KnowledgeGraph left, right;
  PipelineResult result;
};

PlantedRun run_planted(std::size_t threads, std::uint64_t seed = 7) {
  test::PlantedOptions opt;
  opt.seed = seed;
  auto pair = test::make_planted_pair(opt);
  auto left = test::graph_from_nt(pair.left_nt);
  auto right = test::graph_from_nt(pair.right_nt);
  LocalTrigramProvider embedder;
  LabelMatchOptions lopt;
  lopt.embedder = &embedder;
  lopt.threads = threads;
  auto labels = build_label_mappings(left, right, lopt);
  PipelineConfig config;
  config.embedder = &embedder;
  config.threads = threads;
  auto result = run_pipeline(left, right, labels, config);
  return PlantedRun{std::move(pair), std::move(left), std::move(right), std::move(result)};
}

TEST(Pipeline, RecoversPlantedAlignment) {
  auto run = run_planted(1);
  EXPECT_GE(run.pair.left_triples, 300u);
  EXPECT_GE(run.pair.right_triples, 300u);
  auto scores = run.result.scores();
  std::size_t hits = 0;
  for (const auto& [l, r] : run.pair.gold) {
    auto best = scores.argmax(*run.left.find_node(l));
    if (best && run.right.iri(*best) == r) ++hits;
  }
  double hit1 = static_cast<double>(hits) / run.pair.gold.size();
  EXPECT_GE(hit1, 0.95);
  EXPECT_EQ(run.result.stop_reason, StopReason::Converged);
  EXPECT_LE(run.result.history.size(), 4u);
  EXPECT_FALSE(run.result.triples.empty());
  for (const auto& m : run.result.entities) {
    ASSERT_GE(m.combined, 0.0);
    ASSERT_LE(m.combined, 1.0);
  }
}

std::string render(const PlantedRun& run) {
  std::ostringstream out;
  write_entity_mappings(out, run.left, run.right, run.result.entities);
  write_triple_mappings(out, run.left, run.right, run.result.triples);
  return out.str();
}

TEST(Pipeline, OutputsIdenticalAcrossThreadCountsAndRuns) {
  const std::string base = render(run_planted(1, 3));
  EXPECT_EQ(render(run_planted(1, 3)), base);
  EXPECT_EQ(render(run_planted(2, 3)), base);
  EXPECT_EQ(render(run_planted(4, 3)), base);
}

// Species is categorical (60 subjects, three values); each subject has exactly one species.
struct SpeciesGraphs {
  KnowledgeGraph left, right;
};

SpeciesGraphs species_graphs() {
  const char* values[] = {"Human", "Augment", "Vulcan"};
  std::string l, r;
  for (int i = 0; i < 60; ++i) {
    l += "<http://l/c" + std::to_string(i) + "> <http://l/species> \"" + values[i % 3] + "\" .\n";
    r += "<http://r/c" + std::to_string(i) + "> <http://r/species> \"" + values[i % 3] + "\" .\n";
  }
  l += "<http://l/Khan> <http://l/species> \"Augment\" .\n<http://l/Kirk> <http://l/species> \"Human\" .\n";
  r += "<http://r/Khan> <http://r/species> \"Human\" .\n<http://r/Kirk> <http://r/species> \"Human\" .\n";
  return {test::graph_from_nt(l), test::graph_from_nt(r)};
}

TEST(Divergences, ClassifiesCompatibleAndDivergentSpecies) {
  auto g = species_graphs();
  NodeId lk = *g.left.find_node("http://l/Khan"), rk = *g.right.find_node("http://r/Khan");
  NodeId lj = *g.left.find_node("http://l/Kirk"), rj = *g.right.find_node("http://r/Kirk");
  EntityScores scores;
  scores.set(lk, rk, 0.95);
  scores.set(lj, rj, 0.95);
  scores.set(lj, rk, 0.30);
  scores.finalize();
  std::vector<LabelMatch> preds = {
      {*g.left.find_node("http://l/species"), *g.right.find_node("http://r/species"), 0.9, LabelTier::Normalized}};
  auto result = compute_divergences(g.left, g.right, scores, PredicateMap(preds));
  ASSERT_EQ(result.size(), 2u);
  const auto fun = g.left.stats(Iri("http://l/species")).functionality;
  const auto inv_l = g.left.stats(Iri("http://l/species")).inverse_functionality;
  const auto inv_r = g.right.stats(Iri("http://r/species")).inverse_functionality;
  EXPECT_EQ(fun, 1.0);
  for (const auto& m : result) {
    ASSERT_TRUE(m.divergence);
    if (g.left.record(m.left).subject == lk) {
      EXPECT_NEAR(*m.divergence, oracle_similarity(0.95, 0.9, 1, 1, inv_l, inv_r, 1.0), 1e-12);
      EXPECT_EQ(m.compat, 0.0);
      EXPECT_EQ(m.classification, Classification::Divergent);
    } else {
      EXPECT_EQ(g.left.record(m.left).subject, lj);
      EXPECT_EQ(*m.divergence, 0.0);
      EXPECT_NEAR(m.compat, oracle_similarity(0.95, 0.9, 1, 1, inv_l, inv_r, 1.0), 1e-12);
      EXPECT_EQ(m.classification, Classification::Compatible);
    }
  }
}

TEST(Divergences, PartialObjectSimilarityLowersDivergence) {
  // Entity objects with a stored pair similarity of 0.66 leave 0.34 for the divergence term.
  auto l = test::graph_from_nt("<http://l/Riker> <http://l/rank> <http://l/Commander> .\n");
  auto r = test::graph_from_nt("<http://r/Riker> <http://r/rank> <http://r/Captain> .\n");
  EntityScores scores;
  scores.set(*l.find_node("http://l/Riker"), *r.find_node("http://r/Riker"), 1.0);
  scores.set(*l.find_node("http://l/Commander"), *r.find_node("http://r/Captain"), 0.66);
  scores.finalize();
  std::vector<LabelMatch> preds = {{*l.find_node("http://l/rank"), *r.find_node("http://r/rank"), 1.0, LabelTier::UriExact}};
  auto result = compute_divergences(l, r, scores, PredicateMap(preds));
  ASSERT_EQ(result.size(), 1u);
  EXPECT_NEAR(*result[0].divergence, 1.0 - 0.66 * 0.66, 1e-12);
  EXPECT_NEAR(result[0].compat, 1.0 - 0.34 * 0.34, 1e-12);
  EXPECT_EQ(result[0].classification, Classification::Compatible);
}

TEST(Divergences, NoSharedPredicatesGivesNothing) {
  auto g = species_graphs();
  EntityScores scores;
  scores.set(*g.left.find_node("http://l/Khan"), *g.right.find_node("http://r/Khan"), 0.95);
  scores.finalize();
  EXPECT_TRUE(compute_divergences(g.left, g.right, scores, PredicateMap{}).empty());
}

TEST(MappingFiles, EntityRoundTripAndErrors) {
  auto g = species_graphs();
  std::vector<EntityMapping> m = {
      {*g.left.find_node("http://l/Khan"), *g.right.find_node("http://r/Khan"), 0.8, std::nullopt, 0.7},
      {*g.left.find_node("http://l/Kirk"), *g.right.find_node("http://r/Kirk"), std::nullopt, 0.25, 0.5}};
  m[0].combined = 0.75;
  m[1].combined = 0.5;
  std::ostringstream out;
  write_entity_mappings(out, g.left, g.right, m);
  EXPECT_EQ(out.str(),
            "left\tright\tcombined\tc_label\tc_triple\n"
            "http://l/Khan\thttp://r/Khan\t0.750000000\t0.800000000\t\n"
            "http://l/Kirk\thttp://r/Kirk\t0.500000000\t\t0.250000000\n");
  std::istringstream in(out.str());
  auto back = read_entity_mappings(in, g.left, g.right);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].left, m[0].left);
  EXPECT_EQ(back[1].c_triple, 0.25);
  EXPECT_FALSE(back[1].c_label);

  std::istringstream bad_header("a\tb\n");
  EXPECT_THROW(read_entity_mappings(bad_header, g.left, g.right), ParseError);
  std::istringstream bad_row("left\tright\tcombined\tc_label\tc_triple\nhttp://l/Khan\thttp://r/Khan\tabc\t\t\n");
  EXPECT_THROW(read_entity_mappings(bad_row, g.left, g.right), ParseError);
  std::istringstream short_row("left\tright\tcombined\tc_label\tc_triple\nhttp://l/Khan\t0.5\n");
  EXPECT_THROW(read_entity_mappings(short_row, g.left, g.right), ParseError);
  std::istringstream unknown("left\tright\tcombined\tc_label\tc_triple\nhttp://l/None\thttp://r/Khan\t0.5\t\t\n");
  EXPECT_TRUE(read_entity_mappings(unknown, g.left, g.right).empty());
}

TEST(MappingFiles, TripleRowsAreNTriplesEncoded) {
  auto l = test::graph_from_nt("<http://l/a> <http://l/p> \"tab\\there\"@en .\n");
  auto r = test::graph_from_nt("<http://r/a> <http://r/p> <http://r/b> .\n");
  std::vector<TripleMapping> m = {{0, 0, 0.5, 0.25, Phase::Outbound, 2, Classification::Divergent}};
  std::ostringstream out;
  write_triple_mappings(out, l, r, m);
  EXPECT_EQ(out.str(),
            "s1\tp1\to1\ts2\tp2\to2\tcompat\tdivergence\tphase\tclassification\n"
            "<http://l/a>\t<http://l/p>\t\"tab\\there\"@en\t<http://r/a>\t<http://r/p>\t<http://r/b>\t0.500000000\t"
            "0.250000000\toutbound\tdivergent\n");
}

}  // namespace
}  // namespace ftm
