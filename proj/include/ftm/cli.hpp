#pragma once

// Command-line front end: configuration and the match, diverge, eval, stats and
// build-triple-gold commands.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ftm/ingest.hpp"
#include "ftm/object_similarity.hpp"
#include "ftm/triple_matcher.hpp"

namespace ftm {

enum class EmbedderKind { Local, Remote };

struct RunConfig {
  std::string source;
  std::string target;
  std::optional<RdfFormat> format;        // overrides the file extension for both inputs
  std::string endpoint = "none";          // which inputs are SPARQL endpoints: none, source, target, both
  std::size_t page_size = 10000;
  std::vector<std::string> label_predicates;  // empty means the defaults
  EmbedderKind embedder = EmbedderKind::Local;
  std::string embedder_url;
  std::size_t k_top = 10;
  int max_iterations = 10;
  Thresholds thresholds;
  CategoricalOptions categorical;
  std::size_t common_literal_cap = 1000;
  std::filesystem::path output_dir = ".";
  std::uint64_t seed = 0x5EED5EED5EED5EEDULL;
  std::optional<std::size_t> threads;     // absent or 0: one per hardware thread
};

struct ConfigKey {
  const char* name;
  const char* help;
};

/// Every key accepted in a JSON config file.
const std::vector<ConfigKey>& config_keys();

/// Applies a JSON object to `config`. Unknown keys and ill-typed values throw Error(Config).
void apply_config_json(RunConfig& config, std::string_view json_text);

/// Range checks; throws Error(Config).
void validate(const RunConfig& config);

/// Runs the command line. Returns 0 on success, 1 on internal errors and 2 on usage or input
/// errors; diagnostics go to `err` as "error [category]: message".
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ftm
