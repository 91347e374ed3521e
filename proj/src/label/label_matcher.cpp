#include "ftm/label_matcher.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "ftm/error.hpp"
#include "ftm/parallel.hpp"
#include "ftm/text.hpp"

namespace ftm {

namespace detail {
extern const std::string_view kStopwordsText;
}

const char* to_string(LabelTier tier) {
  switch (tier) {
    case LabelTier::UriExact:
      return "uri_exact";
    case LabelTier::LabelExact:
      return "label_exact";
    case LabelTier::Normalized:
      return "normalized";
    case LabelTier::StopwordStripped:
      return "stopword_stripped";
    case LabelTier::Fuzzy:
      return "fuzzy";
    case LabelTier::Embedding:
      return "embedding";
  }
  return "fuzzy";
}

double tier_ceiling(LabelTier tier) {
  switch (tier) {
    case LabelTier::UriExact:
      return kUriExactScore;
    case LabelTier::LabelExact:
      return kLabelExactScore;
    case LabelTier::Normalized:
      return kNormalizedScore;
    case LabelTier::StopwordStripped:
      return kStopwordScore;
    case LabelTier::Fuzzy:
    case LabelTier::Embedding:
      return kCrossProductWeight;
  }
  return kCrossProductWeight;
}

// ---------------------------------------------------------------------------------------------
// Normalization

namespace {

bool is_apostrophe(char32_t c) { return c == '\'' || c == 0x2019 || c == 0x2018 || c == 0x02BC; }
bool is_lower_letter(char32_t c) { return is_letter(c) && !is_upper(c); }

const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> words = [] {
    std::unordered_set<std::string> out;
    std::string_view text = detail::kStopwordsText;
    while (!text.empty()) {
      auto nl = text.find('\n');
      std::string_view line = text.substr(0, nl);
      while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
      if (!line.empty()) out.emplace(line);
      if (nl == std::string_view::npos) break;
      text.remove_prefix(nl + 1);
    }
    return out;
  }();
  return words;
}

std::vector<std::string_view> split_spaces(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::string normalize_label(std::string_view label) {
  std::u32string in = utf8_decode(label);

  // Parenthesized segments, matched with a stack; an unmatched parenthesis is plain punctuation.
  std::vector<bool> drop(in.size(), false);
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (in[i] == '(') {
      open.push_back(i);
    } else if (in[i] == ')' && !open.empty()) {
      std::size_t start = open.back();
      open.pop_back();
      if (open.empty()) std::fill(drop.begin() + static_cast<std::ptrdiff_t>(start), drop.begin() + static_cast<std::ptrdiff_t>(i) + 1, true);
    }
  }

  std::u32string cleaned;
  cleaned.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    char32_t c = in[i];
    if (drop[i]) {
      if (i == 0 || !drop[i - 1]) cleaned.push_back(' ');
      continue;
    }
    if (is_apostrophe(c)) continue;
    if (c == '_' || is_punct(c) || is_space(c)) {
      cleaned.push_back(' ');
      continue;
    }
    cleaned.push_back(c);
  }

  std::u32string split;
  split.reserve(cleaned.size() * 2);
  for (std::size_t i = 0; i < cleaned.size(); ++i) {
    char32_t c = cleaned[i];
    if (i > 0) {
      char32_t p = cleaned[i - 1];
      bool boundary = (is_lower_letter(p) && is_upper(c)) || (is_letter(p) && is_digit(c)) ||
                      (is_digit(p) && is_letter(c)) ||
                      (is_upper(p) && is_upper(c) && i + 1 < cleaned.size() && is_lower_letter(cleaned[i + 1]));
      if (boundary) split.push_back(' ');
    }
    split.push_back(c);
  }

  std::u32string out;
  out.reserve(split.size());
  for (char32_t c : split) {
    if (c == ' ') {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(to_lower(c));
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return utf8_encode(out);
}

bool is_stopword(std::string_view token) { return stopwords().count(std::string(token)) > 0; }

std::size_t stopword_count() { return stopwords().size(); }

std::string strip_stopwords(std::string_view normalized) {
  std::string out;
  for (auto token : split_spaces(normalized)) {
    if (is_stopword(token)) continue;
    if (!out.empty()) out.push_back(' ');
    out.append(token);
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Fuzzy similarity

double indel_ratio(std::u32string_view a, std::u32string_view b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::uint32_t> row(b.size() + 1, 0);
  for (char32_t ca : a) {
    std::uint32_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::uint32_t up = row[j];
      row[j] = ca == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
      diag = up;
    }
  }
  return 2.0 * row[b.size()] / static_cast<double>(a.size() + b.size());
}

namespace {

// Label pre-processed once for fuzzy comparison.
struct FuzzyForm {
  std::u32string lower;
  std::u32string sorted_tokens;
  std::vector<std::u32string> token_set;  // sorted, unique
};

FuzzyForm fuzzy_form(std::string_view text) {
  FuzzyForm f;
  f.lower = utf8_decode(text);
  for (auto& c : f.lower) c = to_lower(c);
  std::vector<std::u32string> tokens;
  std::size_t i = 0;
  while (i < f.lower.size()) {
    while (i < f.lower.size() && is_space(f.lower[i])) ++i;
    std::size_t j = i;
    while (j < f.lower.size() && !is_space(f.lower[j])) ++j;
    if (j > i) tokens.emplace_back(f.lower.substr(i, j - i));
    i = j;
  }
  std::sort(tokens.begin(), tokens.end());
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (k) f.sorted_tokens.push_back(' ');
    f.sorted_tokens += tokens[k];
  }
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  f.token_set = std::move(tokens);
  return f;
}

std::u32string join(const std::vector<std::u32string>& parts) {
  std::u32string out;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (k) out.push_back(' ');
    out += parts[k];
  }
  return out;
}

double token_set_ratio(const FuzzyForm& a, const FuzzyForm& b) {
  if (a.token_set.empty() || b.token_set.empty()) return 0.0;
  std::vector<std::u32string> sect, ab, ba;
  std::set_intersection(a.token_set.begin(), a.token_set.end(), b.token_set.begin(), b.token_set.end(),
                        std::back_inserter(sect));
  std::set_difference(a.token_set.begin(), a.token_set.end(), b.token_set.begin(), b.token_set.end(),
                      std::back_inserter(ab));
  std::set_difference(b.token_set.begin(), b.token_set.end(), a.token_set.begin(), a.token_set.end(),
                      std::back_inserter(ba));
  const std::u32string t0 = join(sect);
  const std::u32string diff_ab = join(ab);
  const std::u32string diff_ba = join(ba);
  const std::u32string t1 = t0.empty() ? diff_ab : (diff_ab.empty() ? t0 : t0 + U" " + diff_ab);
  const std::u32string t2 = t0.empty() ? diff_ba : (diff_ba.empty() ? t0 : t0 + U" " + diff_ba);
  double best = indel_ratio(t1, t2);
  if (!t0.empty()) best = std::max({best, indel_ratio(t0, t1), indel_ratio(t0, t2)});
  return best;
}

double fuzzy_forms(const FuzzyForm& a, const FuzzyForm& b) {
  if (a.lower.empty() || b.lower.empty()) return a.lower.empty() && b.lower.empty() ? 1.0 : 0.0;
  double best = indel_ratio(a.lower, b.lower);
  if (best == 1.0) return 1.0;
  best = std::max(best, indel_ratio(a.sorted_tokens, b.sorted_tokens));
  best = std::max(best, 0.95 * token_set_ratio(a, b));
  return best;
}

}  // namespace

double fuzzy_similarity(std::string_view a, std::string_view b) { return fuzzy_forms(fuzzy_form(a), fuzzy_form(b)); }

// ---------------------------------------------------------------------------------------------
// Scoring

namespace {

struct PreparedLabel {
  std::string raw;
  std::string normalized;
  std::string stripped;
  FuzzyForm fuzzy;
  std::size_t embedding = 0;  // index into the embedding table
};

struct Candidate {
  double score = 0.0;
  LabelTier tier = LabelTier::Fuzzy;
};

void offer(Candidate& c, double score, LabelTier tier) {
  // Ties keep the earlier (stronger) tier, since tiers are offered from strongest to weakest.
  if (score > c.score) {
    c.score = score;
    c.tier = tier;
  }
}

PreparedLabel prepare(const std::string& raw) {
  PreparedLabel p;
  p.raw = raw;
  p.normalized = normalize_label(raw);
  p.stripped = strip_stopwords(p.normalized);
  p.fuzzy = fuzzy_form(raw);
  return p;
}

struct EmbeddingTable {
  std::vector<EmbeddingVector> vectors;
  bool enabled = false;
};

// Embeds every label through the provider in one batch; a provider failure disables the tier.
EmbeddingTable embed_labels(EmbeddingProvider* embedder, std::vector<PreparedLabel*>& labels,
                            std::vector<std::string>* warnings) {
  EmbeddingTable table;
  if (embedder == nullptr || labels.empty()) return table;
  std::vector<std::string> texts;
  std::unordered_map<std::string, std::size_t> index;
  for (auto* l : labels) {
    auto [it, fresh] = index.emplace(l->raw, texts.size());
    if (fresh) texts.push_back(l->raw);
    l->embedding = it->second;
  }
  try {
    table.vectors = embedder->embed_batch(texts);
    if (table.vectors.size() != texts.size())
      throw ProviderError(0, 1, "provider returned " + std::to_string(table.vectors.size()) + " vectors for " +
                                    std::to_string(texts.size()) + " labels");
    table.enabled = true;
  } catch (const Error& e) {
    if (warnings) warnings->push_back(std::string("embedding tier disabled, falling back to fuzzy: ") + e.what());
    table.vectors.clear();
  }
  return table;
}

void score_exact(const std::vector<PreparedLabel>& a, const std::vector<PreparedLabel>& b, Candidate& c) {
  for (const auto& x : a) {
    for (const auto& y : b) {
      if (x.raw == y.raw) offer(c, kLabelExactScore, LabelTier::LabelExact);
      if (x.normalized == y.normalized) offer(c, kNormalizedScore, LabelTier::Normalized);
      if (!x.stripped.empty() && x.stripped == y.stripped) offer(c, kStopwordScore, LabelTier::StopwordStripped);
    }
  }
}

void score_cross(const std::vector<PreparedLabel>& a, const std::vector<PreparedLabel>& b, bool use_fuzzy,
                 const EmbeddingTable& emb, Candidate& c) {
  if (c.score >= kCrossProductWeight) return;
  double best_fuzzy = 0.0;
  double best_cos = 0.0;
  for (const auto& x : a) {
    for (const auto& y : b) {
      if (use_fuzzy) best_fuzzy = std::max(best_fuzzy, fuzzy_forms(x.fuzzy, y.fuzzy));
      if (emb.enabled) best_cos = std::max(best_cos, label_cosine(emb.vectors[x.embedding], emb.vectors[y.embedding]));
    }
  }
  offer(c, kCrossProductWeight * best_fuzzy, LabelTier::Fuzzy);
  offer(c, kCrossProductWeight * best_cos, LabelTier::Embedding);
}

}  // namespace

std::optional<LabelMapping> label_confidence(const Iri& left_uri, std::span<const std::string> left_labels,
                                             const Iri& right_uri, std::span<const std::string> right_labels,
                                             const LabelScoring& scoring, std::vector<std::string>* warnings) {
  Candidate c;
  if (left_uri == right_uri) offer(c, kUriExactScore, LabelTier::UriExact);
  std::vector<PreparedLabel> a, b;
  for (const auto& l : left_labels) a.push_back(prepare(l));
  for (const auto& l : right_labels) b.push_back(prepare(l));
  score_exact(a, b, c);
  if (scoring.cross_product) {
    std::vector<PreparedLabel*> all;
    for (auto& l : a) all.push_back(&l);
    for (auto& l : b) all.push_back(&l);
    EmbeddingTable emb = embed_labels(scoring.embedder, all, warnings);
    score_cross(a, b, scoring.use_fuzzy, emb, c);
  }
  if (c.score < scoring.floor || c.score <= 0.0) return std::nullopt;
  return LabelMapping{left_uri, right_uri, c.score, c.tier};
}

// ---------------------------------------------------------------------------------------------
// Whole-graph mapping

namespace {

struct Side {
  const KnowledgeGraph* kg = nullptr;
  std::vector<NodeId> nodes;
  std::vector<std::vector<PreparedLabel>> labels;
};

Side prepare_side(const KnowledgeGraph& kg, std::span<const NodeId> nodes, std::size_t threads) {
  Side side;
  side.kg = &kg;
  // Blank nodes are local to their document; their generated ids carry no meaning across graphs.
  for (NodeId n : nodes) {
    if (kg.iri(n).rfind("_:", 0) != 0) side.nodes.push_back(n);
  }
  side.labels.resize(side.nodes.size());
  parallel_chunks(side.nodes.size(), threads, std::min<std::size_t>(side.nodes.size(), 64),
                  [&](std::size_t b, std::size_t e, std::size_t) {
                    for (std::size_t i = b; i < e; ++i) {
                      for (const auto& l : kg.labels(side.nodes[i])) side.labels[i].push_back(prepare(l));
                    }
                  });
  return side;
}

using Postings = std::unordered_map<std::string, std::vector<std::uint32_t>>;

template <typename KeyFn>
Postings index_right(const Side& right, KeyFn keys) {
  Postings index;
  for (std::uint32_t i = 0; i < right.nodes.size(); ++i) {
    for (const auto& l : right.labels[i]) {
      for (auto& k : keys(l)) {
        auto& list = index[k];
        if (list.empty() || list.back() != i) list.push_back(i);
      }
    }
  }
  for (auto& [k, list] : index) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return index;
}

std::vector<std::string> block_tokens(const PreparedLabel& l) {
  std::vector<std::string> out;
  for (auto t : split_spaces(l.normalized)) {
    if (!is_stopword(t)) out.emplace_back(t);
  }
  return out;
}

std::vector<LabelMatch> match_class(Side& left, Side& right, const LabelMatchOptions& options,
                                    std::vector<std::string>& warnings) {
  if (left.nodes.empty() || right.nodes.empty()) return {};

  std::unordered_map<std::string_view, std::uint32_t> right_by_iri;
  for (std::uint32_t i = 0; i < right.nodes.size(); ++i) right_by_iri.emplace(right.kg->iri(right.nodes[i]), i);
  const Postings by_raw = index_right(right, [](const PreparedLabel& l) { return std::vector<std::string>{l.raw}; });
  const Postings by_norm =
      index_right(right, [](const PreparedLabel& l) { return std::vector<std::string>{l.normalized}; });
  const Postings by_strip = index_right(right, [](const PreparedLabel& l) {
    return l.stripped.empty() ? std::vector<std::string>{} : std::vector<std::string>{l.stripped};
  });

  const bool full_cross = std::min(left.nodes.size(), right.nodes.size()) < options.cross_product_limit;
  const bool any_cross = options.use_fuzzy || options.embedder != nullptr;
  Postings by_token;
  std::unordered_set<std::string> frequent_left_tokens;
  if (any_cross && !full_cross) {
    by_token = index_right(right, block_tokens);
    std::unordered_map<std::string, std::size_t> left_df;
    for (std::size_t i = 0; i < left.nodes.size(); ++i) {
      std::unordered_set<std::string> seen;
      for (const auto& l : left.labels[i]) {
        for (auto& t : block_tokens(l)) seen.insert(std::move(t));
      }
      for (const auto& t : seen) ++left_df[t];
    }
    for (const auto& [t, df] : left_df) {
      if (df > options.max_block_frequency) frequent_left_tokens.insert(t);
    }
  }

  EmbeddingTable emb;
  if (options.embedder != nullptr) {
    std::vector<PreparedLabel*> all;
    for (auto& ls : left.labels)
      for (auto& l : ls) all.push_back(&l);
    for (auto& ls : right.labels)
      for (auto& l : ls) all.push_back(&l);
    emb = embed_labels(options.embedder, all, &warnings);
  }

  return parallel_collect<LabelMatch>(left.nodes.size(), options.threads, [&](std::size_t li, std::vector<LabelMatch>& out) {
    std::unordered_map<std::uint32_t, Candidate> cands;
    const auto& labels = left.labels[li];
    if (auto it = right_by_iri.find(left.kg->iri(left.nodes[li])); it != right_by_iri.end())
      offer(cands[it->second], kUriExactScore, LabelTier::UriExact);
    for (const auto& l : labels) {
      if (auto it = by_raw.find(l.raw); it != by_raw.end())
        for (auto r : it->second) offer(cands[r], kLabelExactScore, LabelTier::LabelExact);
      if (auto it = by_norm.find(l.normalized); it != by_norm.end())
        for (auto r : it->second) offer(cands[r], kNormalizedScore, LabelTier::Normalized);
      if (!l.stripped.empty()) {
        if (auto it = by_strip.find(l.stripped); it != by_strip.end())
          for (auto r : it->second) offer(cands[r], kStopwordScore, LabelTier::StopwordStripped);
      }
    }

    if (any_cross) {
      auto score_pair = [&](std::uint32_t r) {
        auto it = cands.find(r);
        if (it != cands.end() && it->second.score >= kCrossProductWeight) return;
        Candidate c = it == cands.end() ? Candidate{} : it->second;
        score_cross(labels, right.labels[r], options.use_fuzzy, emb, c);
        if (c.score > 0.0) cands[r] = c;
      };
      if (full_cross) {
        for (std::uint32_t r = 0; r < right.nodes.size(); ++r) score_pair(r);
      } else {
        std::vector<std::uint32_t> block;
        for (const auto& l : labels) {
          for (const auto& t : block_tokens(l)) {
            if (frequent_left_tokens.count(t)) continue;
            auto it = by_token.find(t);
            if (it == by_token.end() || it->second.size() > options.max_block_frequency) continue;
            block.insert(block.end(), it->second.begin(), it->second.end());
          }
        }
        std::sort(block.begin(), block.end());
        block.erase(std::unique(block.begin(), block.end()), block.end());
        for (auto r : block) score_pair(r);
      }
    }

    std::vector<LabelMatch> row;
    for (const auto& [r, c] : cands) {
      if (c.score >= options.floor && c.score > 0.0) row.push_back({left.nodes[li], right.nodes[r], c.score, c.tier});
    }
    std::sort(row.begin(), row.end(), [](const LabelMatch& a, const LabelMatch& b) { return a.right < b.right; });
    out.insert(out.end(), row.begin(), row.end());
  });
}

}  // namespace

LabelMappings build_label_mappings(const KnowledgeGraph& left, const KnowledgeGraph& right,
                                   const LabelMatchOptions& options) {
  LabelMappings out;
  {
    Side l = prepare_side(left, left.entities(), options.threads);
    Side r = prepare_side(right, right.entities(), options.threads);
    out.entities = match_class(l, r, options, out.warnings);
  }
  {
    Side l = prepare_side(left, left.predicates(), options.threads);
    Side r = prepare_side(right, right.predicates(), options.threads);
    out.predicates = match_class(l, r, options, out.warnings);
  }
  return out;
}

}  // namespace ftm
