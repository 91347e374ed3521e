#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "ftm/error.hpp"
#include "ftm/evaluation.hpp"
#include "support.hpp"

namespace ftm {
namespace {

std::string two_decimals(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

TEST(Prf, ConfusionCountsFromTripleMatching) {
  EvalReport r = prf_from_counts(1021, 16, 110);
  EXPECT_EQ(two_decimals(r.precision), "0.98");
  EXPECT_EQ(two_decimals(r.recall), "0.90");
  EXPECT_EQ(two_decimals(r.f_measure), "0.94");
  EXPECT_DOUBLE_EQ(r.f_measure, 2.0 * 1021 / (2.0 * 1021 + 16 + 110));
}

TEST(Prf, EmptyPredictionsFlagPrecision) {
  EvalReport r = prf_one_to_one({}, {{"a", "x"}}, 0.0);
  EXPECT_FALSE(r.precision_defined);
  EXPECT_EQ(r.precision, 0.0);
  EXPECT_EQ(r.recall, 0.0);
  EXPECT_EQ(r.fn, 1u);
  EXPECT_TRUE(r.valid);
}

TEST(Prf, IdenticalToGold) {
  std::vector<IriPair> gold = {{"a", "x"}, {"b", "y"}, {"c", "z"}};
  std::vector<ScoredPair> pred = {{"a", "x", 0.9}, {"b", "y", 0.8}, {"c", "z", 0.7}};
  EvalReport r = prf_one_to_one(pred, gold, 0.5);
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_EQ(r.f_measure, 1.0);
}

TEST(Prf, OpenWorldAndTies) {
  std::vector<IriPair> gold = {{"a", "x"}, {"b", "y"}};
  std::vector<ScoredPair> pred = {
      {"a", "x", 0.9}, {"a", "w", 0.9},  // tie: both kept, w is wrong partner for gold source a
      {"b", "q", 0.8}, {"b", "y", 0.3},  // only best target kept
      {"m", "n", 0.99},                  // neither entity in gold: ignored
  };
  EvalReport r = prf_one_to_one(pred, gold, 0.0);
  EXPECT_EQ(r.tp, 1u);
  EXPECT_EQ(r.fp, 2u);
  EXPECT_EQ(r.fn, 1u);
}

TEST(Prf, EmptyGoldInvalid) {
  EvalReport r = threshold_sweep({{"a", "x", 0.5}}, {}, 0.1);
  EXPECT_FALSE(r.valid);
}

// Independent restatement of the one-to-one rules for random checks.
EvalReport naive_prf(const std::vector<ScoredPair>& pred, const std::vector<IriPair>& gold, double t) {
  std::set<IriPair> g(gold.begin(), gold.end());
  std::set<std::string> gl, gr;
  for (auto& [l, r] : g) gl.insert(l), gr.insert(r);
  std::map<std::string, double> best;
  for (auto& p : pred)
    if (p.score >= t) best[p.left] = std::max(best.count(p.left) ? best[p.left] : -1.0, p.score);
  std::set<IriPair> kept;
  for (auto& p : pred)
    if (p.score >= t && p.score == best[p.left] && (gl.count(p.left) || gr.count(p.right))) kept.insert({p.left, p.right});
  std::size_t tp = 0, fp = 0, fn = 0;
  for (auto& k : kept) (g.count(k) ? tp : fp)++;
  for (auto& x : g)
    if (!kept.count(x)) ++fn;
  return prf_from_counts(tp, fp, fn);
}

TEST(Prf, MatchesNaiveOracleOnRandomInstances) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::uniform_int_distribution<int> ent(0, 9), size(0, 100), grid(0, 20);
    std::vector<IriPair> gold;
    std::vector<ScoredPair> pred;
    for (int i = 0, n = size(rng) / 4; i < n; ++i)
      gold.emplace_back("l" + std::to_string(ent(rng)), "r" + std::to_string(ent(rng)));
    for (int i = 0, n = size(rng); i < n; ++i)
      pred.push_back({"l" + std::to_string(ent(rng)), "r" + std::to_string(ent(rng)), grid(rng) / 20.0});
    const double t = grid(rng) / 20.0;
    EvalReport a = prf_one_to_one(pred, gold, t);
    EvalReport b = naive_prf(pred, gold, t);
    ASSERT_EQ(a.tp, b.tp);
    ASSERT_EQ(a.fp, b.fp);
    ASSERT_EQ(a.fn, b.fn);
    ASSERT_EQ(a.f_measure, b.f_measure);
  }
}

TEST(HitAtK, RanksOneThreeTwelve) {
  std::vector<IriPair> gold = {{"a", "t0"}, {"b", "t2"}, {"c", "t11"}};
  std::vector<ScoredPair> pred;
  for (const char* s : {"a", "b", "c"})
    for (int i = 0; i < 15; ++i) pred.push_back({s, "t" + std::to_string(i), 1.0 - i * 0.01});
  EXPECT_DOUBLE_EQ(hit_at_k(pred, gold, 10), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(hit_at_k(pred, gold, 1), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(hit_at_k(pred, gold, 12), 1.0);
  EXPECT_THROW(hit_at_k(pred, gold, 0), ContractViolation);
}

TEST(HitAtK, FifthRankHitsAtTenMissesAtOne) {
  std::vector<ScoredPair> pred;
  for (int i = 0; i < 8; ++i) pred.push_back({"a", "t" + std::to_string(i), 0.9 - i * 0.1});
  EXPECT_EQ(hit_at_k(pred, {{"a", "t4"}}, 10), 1.0);
  EXPECT_EQ(hit_at_k(pred, {{"a", "t4"}}, 1), 0.0);
}

TEST(HitAtK, NondecreasingInK) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> ent(0, 14);
  std::uniform_real_distribution<double> score(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ScoredPair> pred;
    std::vector<IriPair> gold;
    for (int i = 0; i < 60; ++i) pred.push_back({"l" + std::to_string(ent(rng)), "r" + std::to_string(ent(rng)), score(rng)});
    for (int i = 0; i < 10; ++i) gold.emplace_back("l" + std::to_string(i), "r" + std::to_string(ent(rng)));
    double prev = 0;
    for (int k = 1; k <= 16; ++k) {
      double h = hit_at_k(pred, gold, k);
      ASSERT_GE(h, prev);
      prev = h;
    }
  }
}

TEST(Sweep, SinglePrediction) {
  EvalReport r = threshold_sweep({{"a", "x", 0.9}}, {{"a", "x"}}, 0.01);
  EXPECT_EQ(r.f_measure, 1.0);
  EXPECT_LE(r.threshold, 0.9);
  EXPECT_EQ(r.threshold, 0.0);  // ties go to the lowest threshold
}

TEST(Sweep, StepContract) {
  EXPECT_THROW(threshold_sweep({}, {{"a", "x"}}, 0.0), ContractViolation);
  EXPECT_THROW(threshold_sweep({}, {{"a", "x"}}, 0.6), ContractViolation);
  EXPECT_NO_THROW(threshold_sweep({}, {{"a", "x"}}, 0.5));
}

TEST(Sweep, FindsKnownOptimumAndBeatsEndpoints) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<IriPair> gold;
    std::vector<ScoredPair> pred;
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 40; ++i) {
      std::string l = "l" + std::to_string(i);
      gold.emplace_back(l, "r" + std::to_string(i));
      pred.push_back({l, u(rng) < 0.6 ? "r" + std::to_string(i) : "w" + std::to_string(i), std::round(u(rng) * 100) / 100});
    }
    EvalReport best = threshold_sweep(pred, gold, 0.01, 3);
    // Oracle: direct enumeration on the same grid.
    double oracle_f = -1, oracle_t = 0;
    for (int i = 0; i <= 100; ++i) {
      double f = naive_prf(pred, gold, i / 100.0).f_measure;
      if (f > oracle_f) oracle_f = f, oracle_t = i / 100.0;
    }
    EXPECT_DOUBLE_EQ(best.f_measure, oracle_f);
    EXPECT_NEAR(best.threshold, oracle_t, 1e-9);
    EXPECT_GE(best.f_measure, prf_one_to_one(pred, gold, 0.0).f_measure);
    EXPECT_GE(best.f_measure, prf_one_to_one(pred, gold, 1.0).f_measure);
  }
}

TEST(Sweep, ThreadCountDoesNotChangeResult) {
  std::vector<ScoredPair> pred;
  std::vector<IriPair> gold;
  for (int i = 0; i < 50; ++i) {
    gold.emplace_back("l" + std::to_string(i), "r" + std::to_string(i));
    pred.push_back({"l" + std::to_string(i), "r" + std::to_string(i % 3 ? i : i + 1), (i % 17) / 17.0});
  }
  EvalReport a = threshold_sweep(pred, gold, 0.01, 1);
  EvalReport b = threshold_sweep(pred, gold, 0.01, 4);
  EXPECT_EQ(report_json(a), report_json(b));
}

TEST(TriplePrf, CountsPerClass) {
  auto key = [](int i) { return TriplePairKey{"<s" + std::to_string(i) + ">", "<p>", "\"o\"", "<t>", "<q>", "\"o\""}; };
  std::vector<LabeledTriplePair> gold = {{key(1), TripleLabel::Compatible}, {key(2), TripleLabel::Compatible},
                                         {key(3), TripleLabel::Divergent}};
  std::vector<ScoredTriplePair> pred = {{key(1), 0.9}, {key(3), 0.7}, {key(4), 0.99}};
  EvalReport r = triple_prf(pred, gold, TripleLabel::Compatible, 0.6);
  EXPECT_EQ(r.tp, 1u);
  EXPECT_EQ(r.fp, 1u);
  EXPECT_EQ(r.fn, 1u);
  EvalReport best = triple_threshold_sweep(pred, gold, TripleLabel::Compatible, 0.05);
  EXPECT_EQ(best.fp, 0u);
  EXPECT_NEAR(best.threshold, 0.75, 1e-9);
}

LabeledObject entity(const std::string& iri, std::vector<std::string> labels = {}) {
  return {Iri(iri), std::move(labels)};
}
LabeledObject literal(const std::string& raw, const char* datatype = nullptr) {
  std::optional<Iri> dt;
  if (datatype) dt = Iri(std::string("http://www.w3.org/2001/XMLSchema#") + datatype);
  return {classify_literal(raw, dt), {}};
}

TEST(AutoLabel, ReferenceRows) {
  GoldIndex gold(std::vector<IriPair>{{"memory-alpha:resource/Human", "memory-beta:resource/Human"}});
  // Row 1: pages 288 vs 269.
  EXPECT_EQ(auto_label_triple_pair(literal("288", "integer"), literal("269"), gold), TripleLabel::Compatible);
  // Row 2: pages 48 vs 4810.
  EXPECT_EQ(auto_label_triple_pair(literal("48", "integer"), literal("4810"), gold), TripleLabel::Divergent);
  // Row 4: species entity against the number 3.
  EXPECT_EQ(auto_label_triple_pair(entity("memory-alpha:resource/Human"), literal("3"), gold), TripleLabel::Divergent);
  // Row 7: both species are the gold-matched Human.
  EXPECT_EQ(auto_label_triple_pair(entity("memory-alpha:resource/Human"), entity("memory-beta:resource/Human"), gold),
            TripleLabel::Compatible);
}

TEST(AutoLabel, EntityRules) {
  GoldIndex gold(std::vector<IriPair>{{"http://a/Human", "http://b/Human"}});
  EXPECT_EQ(auto_label_triple_pair(entity("http://a/Augment"), entity("http://b/Human"), gold), TripleLabel::Divergent);
  EXPECT_EQ(auto_label_triple_pair(entity("http://a/Human"), entity("http://b/Vulcan"), gold), TripleLabel::Divergent);
  EXPECT_EQ(auto_label_triple_pair(entity("http://a/Augment"), entity("http://b/Vulcan"), gold), TripleLabel::NeedsReview);
  EXPECT_EQ(auto_label_triple_pair(entity("http://a/Vulcan_Race"), literal("vulcan race"), gold), TripleLabel::Compatible);
  EXPECT_EQ(auto_label_triple_pair(entity("http://a/X", {"Vulcan"}), literal("Vulcan"), gold), TripleLabel::Compatible);
  EXPECT_EQ(auto_label_triple_pair(entity("http://a/X", {"Vulcan"}), literal("Romulan"), gold), TripleLabel::NeedsReview);
  EXPECT_EQ(auto_label_triple_pair(literal("2009-03-12", "date"), entity("http://b/Human"), gold), TripleLabel::Divergent);
}

TEST(AutoLabel, LiteralRules) {
  GoldIndex gold(std::vector<IriPair>{});
  auto label = [&](const LabeledObject& a, const LabeledObject& b) { return auto_label_triple_pair(a, b, gold); };
  EXPECT_EQ(label(literal("50"), literal("59")), TripleLabel::Compatible);    // both < 100, diff < 10
  EXPECT_EQ(label(literal("50"), literal("60")), TripleLabel::Divergent);
  EXPECT_EQ(label(literal("1000"), literal("1110")), TripleLabel::Compatible);
  EXPECT_EQ(label(literal("1000"), literal("1112")), TripleLabel::Divergent);
  EXPECT_EQ(label(literal("2009-03-12", "date"), literal("March 12, 2009")), TripleLabel::Compatible);
  EXPECT_EQ(label(literal("2009-03-12T23:00:00Z", "dateTime"), literal("2009-03-12", "date")), TripleLabel::Compatible);
  EXPECT_EQ(label(literal("2009-03-12", "date"), literal("2009-03-13", "date")), TripleLabel::Divergent);
  EXPECT_EQ(label(literal("1850-01-01", "date"), literal("1850-01-01", "date")), TripleLabel::Compatible);
  EXPECT_EQ(label(literal("Pale"), literal("pale")), TripleLabel::Compatible);
  EXPECT_EQ(label(literal("pale"), literal("white")), TripleLabel::NeedsReview);
  EXPECT_EQ(label(literal("42"), literal("forty two")), TripleLabel::Divergent);
}

TEST(AutoLabel, SymmetricForLiterals) {
  GoldIndex gold(std::vector<IriPair>{});
  std::vector<LabeledObject> pool = {literal("288", "integer"), literal("269"), literal("48"), literal("4810"),
                                     literal("-5"), literal("0"), literal("2009-03-12", "date"),
                                     literal("March 13, 2009"), literal("1890-05-01", "date"), literal("Pale"),
                                     literal("pale"), literal("white"), literal("3.14159"), literal("3.0")};
  for (const auto& a : pool)
    for (const auto& b : pool) EXPECT_EQ(auto_label_triple_pair(a, b, gold), auto_label_triple_pair(b, a, gold));
}

const char* kDatasetLeft =
    "<http://a/s1> <http://a/pages> \"288\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n"
    "<http://a/s2> <http://a/pages> \"48\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n"
    "<http://a/s1> <http://a/author> <http://a/p1> .\n"
    "<http://a/s2> <http://a/author> <http://a/p2> .\n"
    "<http://a/s2> <http://a/author> <http://a/p3> .\n"
    "<http://a/s3> <http://a/author> <http://a/p3> .\n"
    "<http://a/s1> <http://a/note> \"x\" .\n";
const char* kDatasetRight =
    "<http://b/s1> <http://b/pages> \"269\" .\n"
    "<http://b/s2> <http://b/pages> \"4810\" .\n"
    "<http://b/s1> <http://b/author> <http://b/p1> .\n"
    "<http://b/s2> <http://b/author> <http://b/p2> .\n"
    "<http://b/s1> <http://b/note> \"x\" .\n";

TEST(TripleDataset, SelectsFunctionalGoldPredicates) {
  KnowledgeGraph left = test::graph_from_nt(kDatasetLeft);
  KnowledgeGraph right = test::graph_from_nt(kDatasetRight);
  GoldStandard gold;
  gold.entity_pairs = {{"http://a/s1", "http://b/s1"}, {"http://a/s2", "http://b/s2"}};
  // author on the left: 3 subjects over 4 triples, functionality 0.75. note is not a gold predicate.
  gold.predicate_pairs = {{"http://a/pages", "http://b/pages"}, {"http://a/author", "http://b/author"}};
  auto candidates = build_triple_dataset(left, right, gold);
  ASSERT_EQ(candidates.size(), 2u);
  std::ostringstream out;
  write_triple_dataset(out, left, right, candidates);
  EXPECT_EQ(out.str(),
            "s1\tp1\to1\ts2\tp2\to2\tlabel\n"
            "<http://a/s1>\t<http://a/pages>\t\"288\"^^<http://www.w3.org/2001/XMLSchema#integer>\t<http://b/s1>\t"
            "<http://b/pages>\t\"269\"\tcompatible\n"
            "<http://a/s2>\t<http://a/pages>\t\"48\"^^<http://www.w3.org/2001/XMLSchema#integer>\t<http://b/s2>\t"
            "<http://b/pages>\t\"4810\"\tdivergent\n");

  std::istringstream back(out.str());
  auto labeled = read_triple_gold(back);
  ASSERT_EQ(labeled.size(), 2u);
  EXPECT_EQ(labeled[1].label, TripleLabel::Divergent);
  EXPECT_EQ(labeled[0].terms[5], "\"269\"");
}

TEST(TripleDataset, TwoGoldSubjectsOnePredicate) {
  KnowledgeGraph left = test::graph_from_nt(
      "<http://a/s1> <http://a/p> \"1\" .\n<http://a/s2> <http://a/q> \"2\" .\n<http://a/s2> <http://a/p2> \"2\" .\n");
  KnowledgeGraph right = test::graph_from_nt("<http://b/s1> <http://b/p> \"1\" .\n<http://b/s2> <http://b/r> \"2\" .\n");
  GoldStandard gold;
  gold.entity_pairs = {{"http://a/s1", "http://b/s1"}, {"http://a/s2", "http://b/s2"}};
  gold.predicate_pairs = {{"http://a/p", "http://b/p"}};
  auto candidates = build_triple_dataset(left, right, gold);
  ASSERT_EQ(candidates.size(), 1u);
  EXPECT_EQ(candidates[0].label, TripleLabel::Compatible);
}

TEST(GoldFiles, Tsv) {
  std::istringstream in("left\tright\n# comment\n<http://a/x>\thttp://b/x\n\nhttp://a/y\t<http://b/y>\r\n");
  GoldStandard g = read_gold_tsv(in);
  ASSERT_EQ(g.entity_pairs.size(), 2u);
  EXPECT_EQ(g.entity_pairs[0], IriPair("http://a/x", "http://b/x"));
  EXPECT_EQ(g.entity_pairs[1], IriPair("http://a/y", "http://b/y"));
  std::istringstream bad("http://a/x\n");
  EXPECT_THROW(read_gold_tsv(bad), ParseError);
}

TEST(GoldFiles, Oaei) {
  std::istringstream in(R"(<?xml version="1.0" encoding="utf-8"?>
<rdf:RDF xmlns="http://knowledgeweb.semanticweb.org/heterogeneity/alignment"
         xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#">
<Alignment>
  <xml>yes</xml>
  <level>0</level>
  <map><Cell>
    <entity1 rdf:resource="http://memory-alpha.org/resource/Human"/>
    <entity2 rdf:resource="http://memory-beta.org/resource/Human"/>
    <relation>=</relation><measure rdf:datatype="xsd:float">1.0</measure>
  </Cell></map>
  <map><Cell>
    <entity1 rdf:resource="http://memory-alpha.org/property/species"/>
    <entity2 rdf:resource="http://memory-beta.org/property/species"/>
    <relation>=</relation><measure>1.0</measure>
  </Cell></map>
  <map><Cell>
    <entity1 rdf:resource="http://memory-alpha.org/class/Person"/>
    <entity2 rdf:resource="http://memory-beta.org/class/Person"/>
    <relation>=</relation><measure>1.0</measure>
  </Cell></map>
  <map><Cell>
    <entity1 rdf:resource="http://memory-alpha.org/resource/A"/>
    <entity2 rdf:resource="http://memory-beta.org/resource/B"/>
    <relation>&lt;</relation><measure>1.0</measure>
  </Cell></map>
</Alignment>
</rdf:RDF>)");
  GoldStandard g = read_gold_oaei(in);
  ASSERT_EQ(g.entity_pairs.size(), 1u);
  EXPECT_EQ(g.entity_pairs[0].second, "http://memory-beta.org/resource/Human");
  ASSERT_EQ(g.predicate_pairs.size(), 1u);
  std::istringstream broken("<Alignment><map>");
  EXPECT_THROW(read_gold_oaei(broken), ParseError);
}

TEST(GoldFiles, LoadDispatchesOnExtension) {
  test::TempDir dir;
  auto tsv = dir.write("gold.tsv", "http://a/x\thttp://b/x\n");
  EXPECT_EQ(load_gold(tsv).entity_pairs.size(), 1u);
  auto xml = dir.write("gold.xml", "<Alignment><map><Cell><entity1 resource=\"http://a/x\"/>"
                                   "<entity2 resource=\"http://b/x\"/></Cell></map></Alignment>");
  EXPECT_EQ(load_gold(xml).entity_pairs.size(), 1u);
  try {
    load_gold(dir.path() / "missing.tsv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Ingest);
  }
}

TEST(Predictions, HeaderAndErrors) {
  std::istringstream in("left\tright\tcombined\tc_label\tc_triple\nhttp://a/x\thttp://b/x\t0.5\t\t0.5\n");
  auto p = read_predictions(in);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0].score, 0.5);
  std::istringstream bad("http://a/x\thttp://b/x\t0.5\nhttp://a/y\thttp://b/y\tnope\n");
  EXPECT_THROW(read_predictions(bad), ParseError);
}

TEST(Report, JsonAndText) {
  EvalReport r = prf_from_counts(1021, 16, 110);
  r.hit_at[1] = 0.5;
  auto j = report_json(r, -1);
  EXPECT_NE(j.find("\"hit_at\":{\"1\":0.5}"), std::string::npos);
  EXPECT_NE(j.find("\"tp\":1021"), std::string::npos);
  EXPECT_NE(report_text(r).find("P 0.98 R 0.90 F 0.94"), std::string::npos);
}

}  // namespace
}  // namespace ftm
