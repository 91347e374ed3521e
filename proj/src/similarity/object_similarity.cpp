#include "ftm/object_similarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ftm/label_matcher.hpp"

namespace ftm {

const char* to_string(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::EntityRef:
      return "entity";
    case ObjectKind::Text:
      return "string";
    case ObjectKind::Number:
      return "number";
    case ObjectKind::DateTime:
      return "date";
    case ObjectKind::Categorical:
      return "categorical";
  }
  return "string";
}

CategoricalDomains detect_categoricals(const KnowledgeGraph& kg, const CategoricalOptions& options) {
  std::unordered_map<NodeId, std::vector<TripleId>> by_predicate;
  for (TripleId t = 0; t < kg.triple_count(); ++t) by_predicate[kg.record(t).predicate].push_back(t);

  CategoricalDomains out;
  for (NodeId p : kg.predicates()) {
    const auto& st = kg.stats(p);
    if (st.triple_count < options.min_support || st.unique_ratio > options.threshold) continue;
    std::map<std::string, std::uint64_t> counts;
    bool textual = true;
    for (TripleId t : by_predicate[p]) {
      const auto& obj = kg.record(t).object;
      if (!obj.is_literal || kg.literal(obj.id).kind != LiteralKind::Text) {
        textual = false;
        break;
      }
      ++counts[normalize_label(kg.literal(obj.id).raw)];
    }
    if (!textual || counts.size() < 2) continue;
    CategoricalDomain d{st.predicate, {}, {}};
    for (auto& [v, c] : counts) {
      d.values.push_back(v);
      d.counts.push_back(c);
    }
    out.emplace(p, std::move(d));
  }
  return out;
}

ObjectView resolve_object(const KnowledgeGraph& kg, const TripleRecord& triple, const CategoricalDomains& domains) {
  ObjectView v;
  if (!triple.object.is_literal) {
    v.kind = ObjectKind::EntityRef;
    v.entity = triple.object.id;
    v.labels = kg.labels(triple.object.id);
    return v;
  }
  v.literal = &kg.literal(triple.object.id);
  switch (v.literal->kind) {
    case LiteralKind::Number:
      v.kind = ObjectKind::Number;
      return v;
    case LiteralKind::DateTime:
      v.kind = ObjectKind::DateTime;
      return v;
    case LiteralKind::Text:
      break;
  }
  v.kind = ObjectKind::Text;
  if (auto it = domains.find(triple.predicate); it != domains.end()) {
    v.kind = ObjectKind::Categorical;
    v.domain = &it->second;
    v.category = normalize_label(v.literal->raw);
  }
  return v;
}

int similarity_row(ObjectKind a, ObjectKind b) {
  using K = ObjectKind;
  auto is = [&](K x, K y) { return (a == x && b == y) || (a == y && b == x); };
  if (is(K::EntityRef, K::EntityRef)) return 1;
  if (is(K::EntityRef, K::Text)) return 2;
  if (is(K::EntityRef, K::Categorical)) return 3;
  if (is(K::Categorical, K::Categorical)) return 4;
  if (is(K::Categorical, K::Text)) return 5;
  if (is(K::Number, K::Number)) return 6;
  if (is(K::Number, K::Text)) return 7;
  if (is(K::Number, K::DateTime)) return 8;
  if (is(K::DateTime, K::DateTime)) return 9;
  if (is(K::DateTime, K::Text)) return 10;
  if (is(K::Text, K::Text)) return 11;
  // Combinations the table does not list: an entity against a number or date is compared through
  // the entity's labels and the literal's text; a categorical value is a string to numbers and dates.
  if (is(K::EntityRef, K::Number) || is(K::EntityRef, K::DateTime)) return 2;
  if (is(K::Number, K::Categorical)) return 7;
  if (is(K::DateTime, K::Categorical)) return 10;
  return 11;
}

double numeric_similarity(double a, double b) {
  if (a == b) return 1.0;
  const double scale = std::max(std::abs(a), std::abs(b));
  const double s = 1.0 - std::abs(a - b) / scale;
  return std::clamp(s, 0.0, 1.0);
}

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

double date_similarity(std::int64_t a, bool a_has_time, std::int64_t b, bool b_has_time) {
  if (a == b) return 1.0;
  if ((!a_has_time || !b_has_time) && floor_div(a, 86400) == floor_div(b, 86400)) return 1.0;
  return numeric_similarity(static_cast<double>(a), static_cast<double>(b));
}

std::vector<double> extract_numbers(std::string_view s) {
  auto digit = [&](std::size_t i) { return i < s.size() && s[i] >= '0' && s[i] <= '9'; };
  auto alnum = [&](std::size_t i) { return std::isalnum(static_cast<unsigned char>(s[i])) != 0; };
  std::vector<double> out;
  std::size_t i = 0;
  while (i < s.size()) {
    bool negative = false;
    if ((s[i] == '-' || s[i] == '+') && digit(i + 1) && (i == 0 || !alnum(i - 1))) {
      negative = s[i] == '-';
      ++i;
    } else if (!digit(i)) {
      ++i;
      continue;
    }
    std::string text;
    std::size_t run = 0;
    while (digit(i)) {
      text.push_back(s[i++]);
      ++run;
    }
    // Thousands groups only after a leading run of at most three digits.
    if (run <= 3) {
      while (i < s.size() && s[i] == ',' && digit(i + 1) && digit(i + 2) && digit(i + 3) && !digit(i + 4)) {
        text.append(s.substr(i + 1, 3));
        i += 4;
      }
    }
    if (i < s.size() && s[i] == '.' && digit(i + 1)) {
      text.push_back('.');
      ++i;
      while (digit(i)) text.push_back(s[i++]);
    }
    double v = std::strtod(text.c_str(), nullptr);
    out.push_back(negative ? -v : v);
  }
  return out;
}

std::int64_t number_as_timestamp(double value, bool* is_year) {
  const bool year = value == std::floor(value) && value >= 1000 && value <= 2999;
  if (is_year) *is_year = year;
  if (year) return days_from_civil(static_cast<std::int64_t>(value), 1, 1) * 86400;
  return static_cast<std::int64_t>(std::llround(value));
}

// ---------------------------------------------------------------------------------------------
// Rows

namespace {

const std::string& text_of(const ObjectView& v) { return v.literal->raw; }

double best_label_fuzzy(const ObjectView& entity, const std::string& text) {
  double best = 0.0;
  for (const auto& l : entity.labels) best = std::max(best, fuzzy_similarity(l, text));
  return best;
}

// Most similar domain value to `text` (normalized) and its similarity; exact normalized match first.
std::pair<const std::string*, double> closest_category(const CategoricalDomain& domain, const std::string& normalized) {
  const auto it = std::lower_bound(domain.values.begin(), domain.values.end(), normalized);
  if (it != domain.values.end() && *it == normalized) return {&*it, 1.0};
  const std::string* best = nullptr;
  double best_sim = 0.0;
  for (const auto& v : domain.values) {
    double s = fuzzy_similarity(v, normalized);
    if (s > best_sim) {
      best_sim = s;
      best = &v;
    }
  }
  return {best, best_sim};
}

ObjectSimilarity categorical_vs_string(const ObjectView& cat, const std::string& text) {
  auto [value, sim] = closest_category(*cat.domain, normalize_label(text));
  if (value == nullptr) return {0.0, 5, "no category value resembles the string"};
  if (*value != cat.category) return {0.0, 5, "closest category value differs from the object's category"};
  return {sim, 5, {}};
}

ObjectSimilarity entity_vs_categorical(const ObjectView& entity, const ObjectView& cat) {
  constexpr double kMinFuzzy = 0.9;
  const std::string* matched = nullptr;
  double matched_sim = 0.0;
  for (const auto& label : entity.labels) {
    auto [value, sim] = closest_category(*cat.domain, normalize_label(label));
    if (value != nullptr && sim >= kMinFuzzy && sim > matched_sim) {
      matched = value;
      matched_sim = sim;
    }
  }
  if (matched == nullptr) return {0.0, 3, "no entity label matches a category value"};
  if (*matched != cat.category) return {0.0, 3, "entity label matches a different category value"};
  return {matched_sim, 3, {}};
}

double number_of(const ObjectView& v) { return *v.literal->number; }

ObjectSimilarity number_vs_string(const ObjectView& num, const std::string& text) {
  double best = fuzzy_similarity(text_of(num), text);
  for (double x : extract_numbers(text)) best = std::max(best, numeric_similarity(number_of(num), x));
  return {best, 7, {}};
}

ObjectSimilarity date_vs_string(const ObjectView& date, const std::string& text) {
  auto found = find_date(text);
  if (!found) return {0.0, 10, "no date found in string"};
  return {date_similarity(*date.literal->timestamp, date.literal->has_time_of_day, found->timestamp,
                          found->has_time_of_day),
          10, {}};
}

}  // namespace

ObjectSimilarity object_similarity_detail(const ObjectView& left, const ObjectView& right, const SimilarityContext& ctx) {
  using K = ObjectKind;
  const int row = similarity_row(left.kind, right.kind);
  // Orient asymmetric rows so that `a` holds the kind named first in the table.
  auto first_is = [&](K k) { return left.kind == k; };
  switch (row) {
    case 1: {
      double s = ctx.entity_similarity ? ctx.entity_similarity(left.entity, right.entity) : 0.5;
      return {std::clamp(s, 0.0, 1.0), 1, {}};
    }
    case 2: {
      const ObjectView& e = first_is(K::EntityRef) ? left : right;
      const ObjectView& l = first_is(K::EntityRef) ? right : left;
      return {best_label_fuzzy(e, text_of(l)), 2, {}};
    }
    case 3:
      return first_is(K::EntityRef) ? entity_vs_categorical(left, right) : entity_vs_categorical(right, left);
    case 4: {
      auto a = categorical_vs_string(left, text_of(right));
      auto b = categorical_vs_string(right, text_of(left));
      return a.value >= b.value ? ObjectSimilarity{a.value, 4, a.note} : ObjectSimilarity{b.value, 4, b.note};
    }
    case 5:
      return first_is(K::Categorical) ? categorical_vs_string(left, text_of(right))
                                      : categorical_vs_string(right, text_of(left));
    case 6:
      return {numeric_similarity(number_of(left), number_of(right)), 6, {}};
    case 7:
      return first_is(K::Number) ? number_vs_string(left, text_of(right)) : number_vs_string(right, text_of(left));
    case 8: {
      const ObjectView& n = first_is(K::Number) ? left : right;
      const ObjectView& d = first_is(K::Number) ? right : left;
      bool year = false;
      std::int64_t ts = number_as_timestamp(number_of(n), &year);
      return {date_similarity(ts, !year, *d.literal->timestamp, d.literal->has_time_of_day), 8, {}};
    }
    case 9:
      return {date_similarity(*left.literal->timestamp, left.literal->has_time_of_day, *right.literal->timestamp,
                              right.literal->has_time_of_day),
              9, {}};
    case 10:
      return first_is(K::DateTime) ? date_vs_string(left, text_of(right)) : date_vs_string(right, text_of(left));
    default:
      return {fuzzy_similarity(text_of(left), text_of(right)), 11, {}};
  }
}

double object_similarity(const ObjectView& left, const ObjectView& right, const SimilarityContext& ctx) {
  return object_similarity_detail(left, right, ctx).value;
}

}  // namespace ftm
