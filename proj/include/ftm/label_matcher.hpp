#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ftm/embedding.hpp"
#include "ftm/graph.hpp"

namespace ftm {

enum class LabelTier { UriExact, LabelExact, Normalized, StopwordStripped, Fuzzy, Embedding };

const char* to_string(LabelTier tier);
double tier_ceiling(LabelTier tier);

inline constexpr double kUriExactScore = 1.0;
inline constexpr double kLabelExactScore = 0.9;
inline constexpr double kNormalizedScore = 0.8;
inline constexpr double kStopwordScore = 0.7;
inline constexpr double kCrossProductWeight = 0.7;

struct LabelMapping {
  Iri left;
  Iri right;
  double confidence = 0.0;
  LabelTier tier = LabelTier::Fuzzy;
};

/// Lowercased label with parenthesized segments removed, underscores and punctuation turned into
/// spaces (apostrophes dropped), camel-case and letter/digit boundaries split, whitespace collapsed.
std::string normalize_label(std::string_view label);

/// Drops tokens found in the bundled English stopword list; keeps the order of the rest.
std::string strip_stopwords(std::string_view normalized);
bool is_stopword(std::string_view token);
std::size_t stopword_count();

/// Indel similarity 2*LCS/(|a|+|b|) over code points. Two empty strings score 1.
double indel_ratio(std::u32string_view a, std::u32string_view b);

/// Max of indel ratio, token-sort ratio and 0.95 x token-set ratio, on lowercased input.
double fuzzy_similarity(std::string_view a, std::string_view b);

struct LabelScoring {
  double floor = 0.35;
  bool cross_product = true;
  bool use_fuzzy = true;
  EmbeddingProvider* embedder = nullptr;  // null disables the embedding tier
};

/// Best tier for one pair of elements, or nothing when the best score is below the floor.
/// An embedding failure falls back to fuzzy scoring and appends a message to `warnings`.
std::optional<LabelMapping> label_confidence(const Iri& left_uri, std::span<const std::string> left_labels,
                                             const Iri& right_uri, std::span<const std::string> right_labels,
                                             const LabelScoring& scoring,
                                             std::vector<std::string>* warnings = nullptr);

struct LabelMatch {
  NodeId left = 0;
  NodeId right = 0;
  double confidence = 0.0;
  LabelTier tier = LabelTier::Fuzzy;

  friend bool operator==(const LabelMatch&, const LabelMatch&) = default;
};

struct LabelMatchOptions {
  double floor = 0.35;
  /// Full cross product for fuzzy/embedding tiers when the smaller side has fewer elements than
  /// this; otherwise only pairs sharing a normalized non-stopword token are scored.
  std::size_t cross_product_limit = 1000;
  /// Blocking tokens carried by more than this many elements on either side are not used as keys.
  std::size_t max_block_frequency = 2000;
  bool use_fuzzy = true;
  EmbeddingProvider* embedder = nullptr;
  std::size_t threads = 0;
};

struct LabelMappings {
  std::vector<LabelMatch> entities;    // sorted by (left, right)
  std::vector<LabelMatch> predicates;  // sorted by (left, right)
  std::vector<std::string> warnings;
};

LabelMappings build_label_mappings(const KnowledgeGraph& left, const KnowledgeGraph& right,
                                   const LabelMatchOptions& options = {});

}  // namespace ftm
