#include <gtest/gtest.h>

#include <random>

#include "ftm/label_matcher.hpp"
#include "ftm/object_similarity.hpp"
#include "support.hpp"

namespace ftm {
namespace {

// Owns the literal and labels so views can point at them.
struct Obj {
  ObjectKind kind = ObjectKind::Text;
  NodeId entity = 0;
  LiteralValue lit;
  std::vector<std::string> labels;
  CategoricalDomain domain{Iri("http://x/cat"), {}, {}};

  static Obj literal(const std::string& raw) {
    Obj o;
    o.lit = classify_literal(raw);
    o.kind = o.lit.kind == LiteralKind::Number     ? ObjectKind::Number
             : o.lit.kind == LiteralKind::DateTime ? ObjectKind::DateTime
                                                   : ObjectKind::Text;
    return o;
  }
  static Obj entity_ref(NodeId id, std::vector<std::string> labels) {
    Obj o;
    o.kind = ObjectKind::EntityRef;
    o.entity = id;
    o.labels = std::move(labels);
    return o;
  }
  static Obj categorical(const std::string& raw, std::vector<std::string> values) {
    Obj o;
    o.kind = ObjectKind::Categorical;
    o.lit = classify_literal(raw);
    std::sort(values.begin(), values.end());
    o.domain.values = values;
    o.domain.counts.assign(values.size(), 10);
    return o;
  }
  ObjectView v() const {
    ObjectView view;
    view.kind = kind;
    view.entity = entity;
    view.labels = labels;
    if (kind != ObjectKind::EntityRef) view.literal = &lit;
    if (kind == ObjectKind::Categorical) {
      view.domain = &domain;
      view.category = normalize_label(lit.raw);
    }
    return view;
  }
};

SimilarityContext ctx_with(double s) {
  return SimilarityContext{[s](NodeId, NodeId) { return s; }};
}

TEST(NumericSimilarity, Examples) {
  EXPECT_DOUBLE_EQ(numeric_similarity(0, 0), 1.0);
  EXPECT_NEAR(numeric_similarity(48, 4810), 1.0 - 4762.0 / 4810.0, 1e-12);
  EXPECT_NEAR(numeric_similarity(48, 4810), 0.0100, 5e-5);
  EXPECT_DOUBLE_EQ(numeric_similarity(100, -100), 0.0);
  EXPECT_NEAR(numeric_similarity(288, 269), 0.9340277777777778, 1e-12);
}

TEST(NumericSimilarity, SymmetricAndOneOnlyWhenEqual) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int i = 0; i < 10000; ++i) {
    double a = d(rng), b = i % 3 ? d(rng) : a;
    double s = numeric_similarity(a, b);
    ASSERT_EQ(s, numeric_similarity(b, a));
    ASSERT_GE(s, 0.0);
    ASSERT_LE(s, 1.0);
    ASSERT_EQ(s == 1.0, a == b);
  }
}

TEST(DateSimilarity, SameDayAcrossFormats) {
  const std::vector<std::string> forms = {"2009-03-12", "March 12, 2009", "12 March 2009", "Mar 12, 2009",
                                          "12 Mar 2009", "2009-03-12T00:00:00Z", "2009-03-12T18:45:00",
                                          "march 12 2009", "12th March 2009"};
  for (const auto& a : forms) {
    for (const auto& b : forms) {
      auto la = classify_literal(a), lb = classify_literal(b);
      ASSERT_EQ(la.kind, LiteralKind::DateTime) << a;
      ASSERT_EQ(lb.kind, LiteralKind::DateTime) << b;
      if (la.has_time_of_day && lb.has_time_of_day && *la.timestamp != *lb.timestamp) continue;
      EXPECT_EQ(date_similarity(*la.timestamp, la.has_time_of_day, *lb.timestamp, lb.has_time_of_day), 1.0)
          << a << " vs " << b;
    }
  }
}

TEST(DateSimilarity, DistantDatesUseEpochFormula) {
  // Epochs from an independent calendar computation: 2000-01-01 = 946684800, 1900-01-01 = -2208988800.
  auto a = classify_literal("2000-01-01"), b = classify_literal("1900-01-01");
  EXPECT_EQ(*a.timestamp, 946684800);
  EXPECT_EQ(*b.timestamp, -2208988800LL);
  EXPECT_DOUBLE_EQ(date_similarity(*a.timestamp, false, *b.timestamp, false), numeric_similarity(946684800.0, -2208988800.0));
  EXPECT_DOUBLE_EQ(date_similarity(*a.timestamp, false, *b.timestamp, false), 0.0);
  auto c = classify_literal("1990-01-01"), d = classify_literal("1990-06-15");
  EXPECT_NEAR(date_similarity(*c.timestamp, false, *d.timestamp, false), 0.9779116465863453, 1e-12);
  EXPECT_EQ(date_similarity(100, true, 100, true), 1.0);
}

TEST(ExtractNumbers, Examples) {
  EXPECT_EQ(extract_numbers("NCC-45167"), std::vector<double>{45167});
  EXPECT_TRUE(extract_numbers("no digits").empty());
  EXPECT_EQ(extract_numbers("1,234 of 7"), (std::vector<double>{1234, 7}));
  EXPECT_EQ(extract_numbers("-5 degrees, +3.5 and x-2"), (std::vector<double>{-5, 3.5, 2}));
  EXPECT_EQ(extract_numbers("12,3456"), (std::vector<double>{12, 3456}));
  EXPECT_EQ(extract_numbers("1234,567"), (std::vector<double>{1234, 567}));
}

TEST(CategoricalDetection, Examples) {
  std::string nt;
  for (int i = 0; i < 100; ++i) {
    const char* g = i % 3 == 0 ? "male" : i % 3 == 1 ? "female" : "other";
    nt += "<http://x/e" + std::to_string(i) + "> <http://x/gender> \"" + g + "\" .\n";
    nt += "<http://x/e" + std::to_string(i) + "> <http://x/name> \"name " + std::to_string(i % 90) + "\" .\n";
  }
  for (int i = 0; i < 10; ++i) nt += "<http://x/e" + std::to_string(i) + "> <http://x/kind> \"thing\" .\n";
  for (int i = 0; i < 100; ++i) nt += "<http://x/e" + std::to_string(i) + "> <http://x/size> \"" + std::to_string(i % 2) + "\" .\n";
  auto g = test::graph_from_nt(nt);
  auto domains = detect_categoricals(g);
  ASSERT_EQ(domains.size(), 1u);
  const auto& d = domains.begin()->second;
  EXPECT_EQ(d.predicate.str(), "http://x/gender");
  EXPECT_EQ(d.values, (std::vector<std::string>{"female", "male", "other"}));
  EXPECT_EQ(d.counts, (std::vector<std::uint64_t>{33, 34, 33}));
  EXPECT_EQ(g.stats(Iri("http://x/gender")).unique_ratio, 0.03);
  EXPECT_EQ(g.stats(Iri("http://x/name")).unique_ratio, 0.9);
}

TEST(ObjectSimilarity, ReferenceExamples) {
  auto e1 = Obj::entity_ref(1, {"T\xC3\xB8nsberg"});
  auto e2 = Obj::entity_ref(2, {"New Asgard"});
  EXPECT_DOUBLE_EQ(object_similarity(e1.v(), e2.v(), ctx_with(0.5)), 0.5);
  auto h1 = Obj::literal("Human"), h2 = Obj::literal("Human");
  EXPECT_DOUBLE_EQ(object_similarity(h1.v(), h2.v(), {}), 1.0);
  auto n1 = Obj::literal("288"), n2 = Obj::literal("269");
  EXPECT_NEAR(object_similarity(n1.v(), n2.v(), {}), 1.0 - 19.0 / 288.0, 1e-12);
}

TEST(ObjectSimilarity, EntityRowUsesContextSymmetrically) {
  auto e1 = Obj::entity_ref(1, {"a"});
  auto e2 = Obj::entity_ref(2, {"b"});
  SimilarityContext ctx{[](NodeId l, NodeId r) { return l == 1 && r == 2 ? 0.8 : 0.1; }};
  EXPECT_DOUBLE_EQ(object_similarity(e1.v(), e2.v(), ctx), 0.8);
}

TEST(ObjectSimilarity, EntityVersusString) {
  auto e = Obj::entity_ref(1, {"Behind Enemy Lines", "BEL"});
  auto s = Obj::literal("behind enemy lines");
  auto d = object_similarity_detail(e.v(), s.v(), {});
  EXPECT_EQ(d.row, 2);
  EXPECT_DOUBLE_EQ(d.value, 1.0);
  EXPECT_DOUBLE_EQ(object_similarity(s.v(), e.v(), {}), 1.0);
}

TEST(ObjectSimilarity, CategoricalRows) {
  const std::vector<std::string> values = {"female", "male", "other"};
  auto c_male = Obj::categorical("Male", values);
  auto c_female = Obj::categorical("female", values);
  auto s_male = Obj::literal("male");
  auto s_femal = Obj::literal("femal");
  auto d = object_similarity_detail(c_male.v(), s_male.v(), {});
  EXPECT_EQ(d.row, 5);
  EXPECT_DOUBLE_EQ(d.value, 1.0);
  // "femal" is closest to "female", which is not the object's category.
  EXPECT_DOUBLE_EQ(object_similarity(c_male.v(), s_femal.v(), {}), 0.0);
  EXPECT_NEAR(object_similarity(c_female.v(), s_femal.v(), {}), fuzzy_similarity("female", "femal"), 1e-12);

  auto c_male2 = Obj::categorical("MALE", values);
  auto cc = object_similarity_detail(c_male.v(), c_male2.v(), {});
  EXPECT_EQ(cc.row, 4);
  EXPECT_DOUBLE_EQ(cc.value, 1.0);
  EXPECT_DOUBLE_EQ(object_similarity(c_male.v(), c_female.v(), {}), 0.0);

  auto ent = Obj::entity_ref(7, {"Male"});
  auto ec = object_similarity_detail(ent.v(), c_male.v(), {});
  EXPECT_EQ(ec.row, 3);
  EXPECT_DOUBLE_EQ(ec.value, 1.0);
  EXPECT_DOUBLE_EQ(object_similarity(ent.v(), c_female.v(), {}), 0.0);
  auto far = Obj::entity_ref(8, {"Zebra"});
  EXPECT_DOUBLE_EQ(object_similarity(far.v(), c_male.v(), {}), 0.0);
}

TEST(ObjectSimilarity, NumberStringAndDates) {
  auto n = Obj::literal("45167");
  auto s = Obj::literal("NCC-45167");
  auto d = object_similarity_detail(n.v(), s.v(), {});
  EXPECT_EQ(d.row, 7);
  EXPECT_DOUBLE_EQ(d.value, 1.0);

  auto year = Obj::literal("2009");
  auto date = Obj::literal("2009-01-01");
  auto nd = object_similarity_detail(year.v(), date.v(), {});
  EXPECT_EQ(nd.row, 8);
  EXPECT_DOUBLE_EQ(nd.value, 1.0);
  auto epoch = Obj::literal("1236816000");
  auto date2 = Obj::literal("2009-03-12");
  EXPECT_DOUBLE_EQ(object_similarity(epoch.v(), date2.v(), {}), 1.0);

  auto text_with_date = Obj::literal("released on 12 March 2009 worldwide");
  auto ds = object_similarity_detail(date2.v(), text_with_date.v(), {});
  EXPECT_EQ(ds.row, 10);
  EXPECT_DOUBLE_EQ(ds.value, 1.0);
  auto no_date = Obj::literal("soon");
  auto nds = object_similarity_detail(date2.v(), no_date.v(), {});
  EXPECT_EQ(nds.value, 0.0);
  EXPECT_FALSE(nds.note.empty());
}

TEST(ObjectSimilarity, DispatcherIsTotalOverAllOrderedPairs) {
  std::set<int> rows;
  for (ObjectKind a : kAllObjectKinds) {
    for (ObjectKind b : kAllObjectKinds) {
      int r = similarity_row(a, b);
      ASSERT_GE(r, 1);
      ASSERT_LE(r, 11);
      ASSERT_EQ(r, similarity_row(b, a)) << to_string(a) << "/" << to_string(b);
      rows.insert(r);
    }
  }
  EXPECT_EQ(rows.size(), 11u);
  using K = ObjectKind;
  EXPECT_EQ(similarity_row(K::EntityRef, K::EntityRef), 1);
  EXPECT_EQ(similarity_row(K::Text, K::EntityRef), 2);
  EXPECT_EQ(similarity_row(K::Categorical, K::EntityRef), 3);
  EXPECT_EQ(similarity_row(K::Categorical, K::Categorical), 4);
  EXPECT_EQ(similarity_row(K::Text, K::Categorical), 5);
  EXPECT_EQ(similarity_row(K::Number, K::Number), 6);
  EXPECT_EQ(similarity_row(K::Text, K::Number), 7);
  EXPECT_EQ(similarity_row(K::DateTime, K::Number), 8);
  EXPECT_EQ(similarity_row(K::DateTime, K::DateTime), 9);
  EXPECT_EQ(similarity_row(K::Text, K::DateTime), 10);
  EXPECT_EQ(similarity_row(K::Text, K::Text), 11);
}

TEST(ObjectSimilarity, BoundedForEveryKindPairAndSymmetricWhereRequired) {
  const std::vector<std::string> values = {"blue", "green", "red"};
  std::vector<Obj> objs;
  objs.push_back(Obj::entity_ref(1, {"Red Planet"}));
  objs.push_back(Obj::entity_ref(2, {"Blue"}));
  objs.push_back(Obj::literal("red planet"));
  objs.push_back(Obj::literal("version 2.5 of 1999"));
  objs.push_back(Obj::literal("-17"));
  objs.push_back(Obj::literal("1999"));
  objs.push_back(Obj::literal("0"));
  objs.push_back(Obj::literal("1999-07-04"));
  objs.push_back(Obj::literal("July 4, 1999"));
  objs.push_back(Obj::categorical("Red", values));
  objs.push_back(Obj::categorical("green", values));
  SimilarityContext ctx{[](NodeId a, NodeId b) { return a == b ? 0.9 : 0.3; }};
  for (auto& a : objs) {
    for (auto& b : objs) {
      auto ab = object_similarity_detail(a.v(), b.v(), ctx);
      auto ba = object_similarity_detail(b.v(), a.v(), ctx);
      ASSERT_GE(ab.value, 0.0);
      ASSERT_LE(ab.value, 1.0);
      ASSERT_EQ(ab.row, ba.row);
      if (ab.row == 1 || ab.row == 4 || ab.row == 6 || ab.row == 9 || ab.row == 11) ASSERT_DOUBLE_EQ(ab.value, ba.value);
    }
  }
}

TEST(ObjectSimilarity, ResolveObjectKinds) {
  std::string nt;
  for (int i = 0; i < 60; ++i) nt += "<http://x/e" + std::to_string(i) + "> <http://x/color> \"" + (i % 2 ? "red" : "blue") + "\" .\n";
  nt += "<http://x/e0> <http://x/size> \"12\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n";
  nt += "<http://x/e0> <http://x/born> \"2001-02-03\"^^<http://www.w3.org/2001/XMLSchema#date> .\n";
  nt += "<http://x/e0> <http://x/knows> <http://x/e1> .\n";
  nt += "<http://x/e0> <http://x/motto> \"carpe diem\" .\n";
  auto g = test::graph_from_nt(nt);
  auto domains = detect_categoricals(g);
  std::map<std::string, ObjectKind> kinds;
  for (TripleId t : g.triples_with_subject(*g.find_node("http://x/e0")))
    kinds[g.iri(g.record(t).predicate)] = resolve_object(g, g.record(t), domains).kind;
  EXPECT_EQ(kinds["http://x/color"], ObjectKind::Categorical);
  EXPECT_EQ(kinds["http://x/size"], ObjectKind::Number);
  EXPECT_EQ(kinds["http://x/born"], ObjectKind::DateTime);
  EXPECT_EQ(kinds["http://x/knows"], ObjectKind::EntityRef);
  EXPECT_EQ(kinds["http://x/motto"], ObjectKind::Text);
}

}  // namespace
}  // namespace ftm
