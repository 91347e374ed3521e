#pragma once

// Synthetic pair of graphs with a known entity alignment. Right-side labels are partly perturbed
// (token shuffles and single-character typos) and a share of entities exists on one side only.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ftm::test {

struct PlantedOptions {
  std::size_t entities = 80;        // per side
  double perturbed = 0.30;          // share of right labels altered
  double unaligned = 0.25;          // share of left entities without a counterpart
  std::uint64_t seed = 7;
};

struct PlantedPair {
  std::string left_nt;
  std::string right_nt;
  std::vector<std::pair<std::string, std::string>> gold;  // (left IRI, right IRI)
  std::size_t perturbed_labels = 0;
  std::size_t left_triples = 0;
  std::size_t right_triples = 0;
};

PlantedPair make_planted_pair(const PlantedOptions& options = {});

}  // namespace ftm::test
