#pragma once

// Independent reference evaluators shared by the unit tests and the acceptance binary. They
// recompute results by brute force from the raw triples, never through the library's indexes or
// candidate generation.

#include <cstdint>
#include <string>

#include "ftm/graph.hpp"
#include "ftm/label_matcher.hpp"
#include "ftm/triple_matcher.hpp"

namespace ftm::test {

/// Direct evaluation of the two noisy-or branches.
double oracle_similarity(double ent, double pred, double f1, double f2, double i1, double i2, double obj);

/// Random graph pair: a handful of predicates, entity and literal objects drawn from small pools so
/// that entity pairs, shared literals and kind mixes all occur.
struct RandomPair {
  KnowledgeGraph left, right;
};
RandomPair make_random_pair(std::uint64_t seed, std::size_t triples);

/// Random predicate mappings and entity scores with coarse values, so top-k ties occur.
struct PhaseFixture {
  std::vector<LabelMatch> predicates;
  EntityScores scores;
};
PhaseFixture random_phase_state(const RandomPair& g, std::uint64_t seed);

struct PhaseComparison {
  std::size_t expected[3] = {0, 0, 0};  // exact attribute, inbound, outbound
  std::size_t mismatched_keys = 0;      // pairs missing from, or extra in, the library's output
  double max_deviation = 0.0;
};

/// Runs the three phases on one random 200-triple pair and compares them with a naive cross
/// product over every triple pair.
PhaseComparison compare_phases_with_cross_product(std::uint64_t seed, std::size_t k = 3, std::size_t cap = 12);

/// True when every predicate's stored statistics equal a recount over the raw triples.
bool stats_match_recount(const KnowledgeGraph& kg);

}  // namespace ftm::test
