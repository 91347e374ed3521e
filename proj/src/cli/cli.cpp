#include "ftm/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ftm/embedding.hpp"
#include "ftm/error.hpp"
#include "ftm/evaluation.hpp"
#include "ftm/label_matcher.hpp"
#include "ftm/parallel.hpp"

namespace ftm {

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

const char* kEndpointChoices[] = {"none", "source", "target", "both"};

[[noreturn]] void config_error(const std::string& message) { throw Error(ErrorCategory::Config, message); }

double number_of(const Json& v, const std::string& key) {
  if (!v.is_number()) config_error("config key '" + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t unsigned_of(const Json& v, const std::string& key) {
  if (!v.is_number_unsigned()) config_error("config key '" + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string string_of(const Json& v, const std::string& key) {
  if (!v.is_string()) config_error("config key '" + key + "' must be a string");
  return v.get<std::string>();
}

EmbedderKind parse_embedder(const std::string& name) {
  if (name == "local") return EmbedderKind::Local;
  if (name == "remote") return EmbedderKind::Remote;
  config_error("embedder must be local or remote, got: " + name);
}

void apply_key(RunConfig& c, const std::string& key, const Json& v) {
  if (key == "source") {
    c.source = string_of(v, key);
  } else if (key == "target") {
    c.target = string_of(v, key);
  } else if (key == "format") {
    c.format = parse_format_name(string_of(v, key));
  } else if (key == "endpoint") {
    c.endpoint = string_of(v, key);
  } else if (key == "page_size") {
    c.page_size = unsigned_of(v, key);
  } else if (key == "label_predicates") {
    if (!v.is_array()) config_error("config key 'label_predicates' must be an array of IRIs");
    c.label_predicates.clear();
    for (const auto& item : v) c.label_predicates.push_back(string_of(item, key));
  } else if (key == "embedder") {
    c.embedder = parse_embedder(string_of(v, key));
  } else if (key == "embedder_url") {
    c.embedder_url = string_of(v, key);
  } else if (key == "k_top") {
    c.k_top = unsigned_of(v, key);
  } else if (key == "max_iterations") {
    if (!v.is_number_integer()) config_error("config key 'max_iterations' must be an integer");
    c.max_iterations = v.get<int>();
  } else if (key == "threshold") {
    c.thresholds.entity = number_of(v, key);
  } else if (key == "compatible_threshold") {
    c.thresholds.compatible = number_of(v, key);
  } else if (key == "divergent_threshold") {
    c.thresholds.divergent = number_of(v, key);
  } else if (key == "categorical_threshold") {
    c.categorical.threshold = number_of(v, key);
  } else if (key == "categorical_min_support") {
    c.categorical.min_support = unsigned_of(v, key);
  } else if (key == "common_literal_cap") {
    c.common_literal_cap = unsigned_of(v, key);
  } else if (key == "output_dir") {
    c.output_dir = string_of(v, key);
  } else if (key == "seed") {
    c.seed = unsigned_of(v, key);
  } else if (key == "threads") {
    c.threads = unsigned_of(v, key);
  } else {
    config_error("unknown config key: " + key);
  }
}

std::string read_file(const std::filesystem::path& path, ErrorCategory category, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(category, std::string("cannot open ") + what + ": " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::ifstream open_input(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::Ingest, std::string("cannot open ") + what + ": " + path.string());
  return in;
}

// Writes through a temporary buffer so a failed run never leaves half a file behind.
void write_output(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ostringstream buf;
  body(buf);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCategory::Io, "cannot write " + path.string());
  out << buf.str();
  if (!out.flush()) throw Error(ErrorCategory::Io, "failed writing " + path.string());
}

void ensure_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCategory::Io, "cannot create output directory " + dir.string() + ": " + ec.message());
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::size_t thread_count(const RunConfig& c) { return resolve_threads(c.threads.value_or(0)); }

std::vector<Iri> label_predicates(const RunConfig& c) {
  if (c.label_predicates.empty()) return default_label_predicates();
  std::vector<Iri> out;
  for (const auto& p : c.label_predicates) {
    try {
      out.emplace_back(p);
    } catch (const ContractViolation&) {
      config_error("label predicate is not an IRI: " + p);
    }
  }
  return out;
}

KnowledgeGraph load_side(const RunConfig& c, const std::string& location, const char* role) {
  if (location.empty()) config_error(std::string("missing --") + role);
  const bool endpoint = c.endpoint == "both" || c.endpoint == role;
  GraphSource source;
  if (endpoint) {
    EndpointSource e;
    e.url = location;
    e.page_size = c.page_size;
    source = e;
  } else {
    source = FileSource{location, c.format};
  }
  return load_graph(source, label_predicates(c));
}

std::unique_ptr<EmbeddingProvider> make_embedder(const RunConfig& c) {
  if (c.embedder == EmbedderKind::Remote) {
    RemoteConfig rc;
    rc.base_url = c.embedder_url;
    return make_provider(rc);
  }
  LocalTrigramConfig lc;
  lc.seed = c.seed;
  return make_provider(lc);
}

OrderedJson graph_summary(const KnowledgeGraph& kg) {
  OrderedJson j;
  j["triples"] = kg.triple_count();
  j["nodes"] = kg.node_count();
  j["literals"] = kg.literal_count();
  j["predicates"] = kg.predicates().size();
  return j;
}

OrderedJson classification_counts(const std::vector<TripleMapping>& mappings) {
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& m : mappings) ++counts[static_cast<int>(m.classification)];
  OrderedJson j;
  for (auto c : {Classification::Compatible, Classification::Divergent, Classification::Undecided})
    j[to_string(c)] = counts[static_cast<int>(c)];
  return j;
}

int cmd_match(const RunConfig& c, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t threads = thread_count(c);
  KnowledgeGraph left = load_side(c, c.source, "source");
  KnowledgeGraph right = load_side(c, c.target, "target");
  const double load_seconds = seconds_since(start);

  auto embedder = make_embedder(c);
  auto label_start = std::chrono::steady_clock::now();
  LabelMatchOptions lo;
  lo.embedder = embedder.get();
  lo.threads = threads;
  LabelMappings labels = build_label_mappings(left, right, lo);
  const double label_seconds = seconds_since(label_start);

  PipelineConfig pc;
  pc.k_top = c.k_top;
  pc.max_iterations = c.max_iterations;
  pc.common_literal_cap = c.common_literal_cap;
  pc.thresholds = c.thresholds;
  pc.categorical = c.categorical;
  pc.embedder = embedder.get();
  pc.threads = threads;
  auto pipeline_start = std::chrono::steady_clock::now();
  PipelineResult result = run_pipeline(left, right, labels, pc);
  const double pipeline_seconds = seconds_since(pipeline_start);

  ensure_output_dir(c.output_dir);
  write_output(c.output_dir / "entity_mappings.tsv",
               [&](std::ostream& o) { write_entity_mappings(o, left, right, result.entities); });
  write_output(c.output_dir / "triple_mappings.tsv",
               [&](std::ostream& o) { write_triple_mappings(o, left, right, result.triples); });

  std::size_t above = 0;
  for (const auto& e : result.entities)
    if (e.combined >= c.thresholds.entity) ++above;

  OrderedJson report;
  report["command"] = "match";
  report["source"] = graph_summary(left);
  report["target"] = graph_summary(right);
  report["embedder"] = embedder->model_name();
  report["label_mappings"] = {{"entities", labels.entities.size()}, {"predicates", labels.predicates.size()}};
  OrderedJson iterations = OrderedJson::array();
  for (const auto& h : result.history) {
    OrderedJson it;
    it["iteration"] = h.iteration;
    it["exact_attribute"] = h.exact_attribute;
    it["inbound"] = h.inbound;
    it["outbound"] = h.outbound;
    it["triple_mappings"] = h.triple_mappings;
    it["entity_pairs"] = h.entity_pairs;
    it["matched_sources"] = h.matched_sources;
    it["growth"] = h.growth;
    it["shift"] = h.shift;
    it["seconds"] = h.seconds;
    iterations.push_back(it);
  }
  report["iterations"] = iterations;
  report["stop_reason"] = to_string(result.stop_reason);
  report["entity_mappings"] = result.entities.size();
  report["entity_threshold"] = c.thresholds.entity;
  report["entity_mappings_above_threshold"] = above;
  report["triple_mappings"] = result.triples.size();
  report["classifications"] = classification_counts(result.triples);
  report["warnings"] = labels.warnings;
  for (const auto& w : result.warnings) report["warnings"].push_back(w);
  report["timings"] = {{"load", load_seconds},
                       {"labels", label_seconds},
                       {"pipeline", pipeline_seconds},
                       {"total", seconds_since(start)}};
  write_output(c.output_dir / "run_report.json", [&](std::ostream& o) { o << report.dump(2) << '\n'; });

  out << "iterations " << result.history.size() << " (" << to_string(result.stop_reason) << "), entity pairs "
      << result.entities.size() << " (" << above << " at or above " << c.thresholds.entity << "), triple pairs "
      << result.triples.size() << "\n";
  return 0;
}

int cmd_diverge(const RunConfig& c, const std::string& mappings_path, std::ostream& out) {
  const std::size_t threads = thread_count(c);
  KnowledgeGraph left = load_side(c, c.source, "source");
  KnowledgeGraph right = load_side(c, c.target, "target");
  const std::filesystem::path path = mappings_path.empty() ? c.output_dir / "entity_mappings.tsv" : std::filesystem::path(mappings_path);
  auto in = open_input(path, "entity mappings");
  std::vector<EntityMapping> mappings;
  try {
    mappings = read_entity_mappings(in, left, right);
  } catch (const ParseError& e) {
    throw ParseError(0, 0, path.string() + ": " + e.what());
  }

  EntityScores scores;
  for (const auto& m : mappings)
    if (m.combined >= c.thresholds.entity) scores.set(m.left, m.right, m.combined);
  scores.finalize();

  auto embedder = make_embedder(c);
  LabelMatchOptions lo;
  lo.embedder = embedder.get();
  lo.threads = threads;
  LabelMappings labels = build_label_mappings(left, right, lo);
  PredicateMap predicates(labels.predicates);

  DivergenceOptions options;
  options.thresholds = c.thresholds;
  options.categorical = c.categorical;
  options.threads = threads;
  auto result = compute_divergences(left, right, scores, predicates, options);

  ensure_output_dir(c.output_dir);
  write_output(c.output_dir / "divergences.tsv",
               [&](std::ostream& o) { write_triple_mappings(o, left, right, result); });
  auto counts = classification_counts(result);
  out << "compatible " << counts["compatible"].get<std::size_t>() << " divergent "
      << counts["divergent"].get<std::size_t>() << " undecided " << counts["undecided"].get<std::size_t>() << "\n";
  return 0;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

std::vector<int> parse_k_list(const std::string& text) {
  std::vector<int> ks;
  for (const auto& item : split(text, ',')) {
    std::size_t used = 0;
    int k = 0;
    try {
      k = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || k < 1) config_error("--k expects positive integers like 1,10, got: " + text);
    ks.push_back(k);
  }
  return ks;
}

// Triple mapping rows (as written by match or diverge), scored by compat or divergence.
std::vector<ScoredTriplePair> read_scored_triples(std::istream& in, TripleLabel target) {
  std::vector<ScoredTriplePair> out;
  std::string line;
  std::size_t number = 0;
  const std::size_t column = target == TripleLabel::Divergent ? 7 : 6;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (number == 1 && line.rfind("s1\t", 0) == 0)) continue;
    auto f = split(line, '\t');
    if (f.size() != 10) throw ParseError(number, 0, "expected a triple mapping row with 10 fields");
    if (f[column].empty()) continue;
    char* end = nullptr;
    const double score = std::strtod(f[column].c_str(), &end);
    if (end != f[column].c_str() + f[column].size()) throw ParseError(number, 0, "score is not a number");
    ScoredTriplePair p;
    std::copy(f.begin(), f.begin() + 6, p.terms.begin());
    p.score = score;
    out.push_back(std::move(p));
  }
  return out;
}

struct EvalOptions {
  std::string predictions;
  std::string gold;
  std::string k_list;
  bool sweep = false;
  double step = 0.01;
  std::string triples;  // empty: entity evaluation; otherwise the triple class to score
  bool json = false;
};

int cmd_eval(const RunConfig& c, const EvalOptions& e, std::ostream& out) {
  const std::size_t threads = thread_count(c);
  EvalReport report;
  if (e.triples.empty()) {
    GoldStandard gold = load_gold(e.gold);
    if (gold.entity_pairs.empty()) throw Error(ErrorCategory::Ingest, "empty gold standard: " + e.gold);
    auto in = open_input(e.predictions, "predictions");
    std::vector<ScoredPair> predicted;
    try {
      predicted = read_predictions(in);
    } catch (const ParseError& err) {
      throw ParseError(0, 0, e.predictions + ": " + err.what());
    }
    report = e.sweep ? threshold_sweep(predicted, gold.entity_pairs, e.step, threads)
                     : prf_one_to_one(predicted, gold.entity_pairs, c.thresholds.entity);
    for (int k : parse_k_list(e.k_list)) report.hit_at[k] = hit_at_k(predicted, gold.entity_pairs, k);
  } else {
    const TripleLabel target = parse_triple_label(e.triples);
    auto gold_in = open_input(e.gold, "triple gold");
    auto gold = read_triple_gold(gold_in);
    if (gold.empty()) throw Error(ErrorCategory::Ingest, "empty gold standard: " + e.gold);
    auto in = open_input(e.predictions, "triple mappings");
    std::vector<ScoredTriplePair> predicted;
    try {
      predicted = read_scored_triples(in, target);
    } catch (const ParseError& err) {
      throw ParseError(0, 0, e.predictions + ": " + err.what());
    }
    const double threshold = target == TripleLabel::Divergent ? c.thresholds.divergent : c.thresholds.compatible;
    report = e.sweep ? triple_threshold_sweep(predicted, gold, target, e.step, threads)
                     : triple_prf(predicted, gold, target, threshold);
  }
  out << (e.json ? report_json(report) + "\n" : report_text(report));
  return 0;
}

int cmd_stats(const RunConfig& c, std::ostream& out) {
  KnowledgeGraph kg = load_side(c, c.source, "source");
  auto stats = kg.all_stats();
  std::sort(stats.begin(), stats.end(), [](const PredicateStats& a, const PredicateStats& b) {
    if (a.triple_count != b.triple_count) return a.triple_count > b.triple_count;
    return a.predicate.str() < b.predicate.str();
  });
  out << "predicate\ttriples\tfunctionality\tinverse_functionality\tunique_ratio\n";
  char buf[96];
  for (const auto& s : stats) {
    std::snprintf(buf, sizeof buf, "\t%llu\t%.6f\t%.6f\t%.6f\n", static_cast<unsigned long long>(s.triple_count),
                  s.functionality, s.inverse_functionality, s.unique_ratio);
    out << s.predicate.str() << buf;
  }
  return 0;
}

struct GoldOptions {
  std::string gold;
  std::string predicate_gold;
  double fun_min = 0.8;
};

int cmd_build_triple_gold(const RunConfig& c, const GoldOptions& g, std::ostream& out) {
  KnowledgeGraph left = load_side(c, c.source, "source");
  KnowledgeGraph right = load_side(c, c.target, "target");
  GoldStandard gold = load_gold(g.gold);
  if (!g.predicate_gold.empty()) {
    GoldStandard extra = load_gold(g.predicate_gold);
    gold.predicate_pairs.insert(gold.predicate_pairs.end(), extra.entity_pairs.begin(), extra.entity_pairs.end());
    gold.predicate_pairs.insert(gold.predicate_pairs.end(), extra.predicate_pairs.begin(), extra.predicate_pairs.end());
  }
  if (gold.entity_pairs.empty()) throw Error(ErrorCategory::Ingest, "empty gold standard: " + g.gold);
  auto candidates = build_triple_dataset(left, right, gold, g.fun_min);
  ensure_output_dir(c.output_dir);
  write_output(c.output_dir / "triple_gold.tsv",
               [&](std::ostream& o) { write_triple_dataset(o, left, right, candidates); });
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& cand : candidates) ++counts[static_cast<int>(cand.label)];
  out << "compatible " << counts[0] << " divergent " << counts[1] << " needs_review " << counts[2] << "\n";
  return 0;
}

// Flags are collected during parsing and applied after the config file, so they win over it.
class Overrides {
 public:
  template <typename T, typename Fn>
  CLI::Option* add(CLI::App* app, const std::string& name, const std::string& help, Fn apply) {
    return app->add_option_function<T>(
        name, [this, apply](const T& v) { pending_.push_back([v, apply](RunConfig& c) { apply(c, v); }); }, help);
  }
  void apply(RunConfig& c) const {
    for (const auto& fn : pending_) fn(c);
  }

 private:
  std::vector<std::function<void(RunConfig&)>> pending_;
};

enum Groups : unsigned {
  kSource = 1,
  kTarget = 2,
  kEmbedder = 4,
  kIteration = 8,
  kEntityThreshold = 16,
  kTripleThresholds = 32,
  kOutput = 64,
};

void add_run_options(CLI::App* app, unsigned groups, Overrides& o, std::string& config_path) {
  app->add_option("--config", config_path, "JSON config file; flags override its values");
  if (groups & kSource) {
    o.add<std::string>(app, "--source", "Source graph: file path (.nt, .ttl, .snap) or endpoint URL",
                       [](RunConfig& c, const std::string& v) { c.source = v; });
  }
  if (groups & kTarget) {
    o.add<std::string>(app, "--target", "Target graph: file path or endpoint URL",
                       [](RunConfig& c, const std::string& v) { c.target = v; });
  }
  if (groups & (kSource | kTarget)) {
    o.add<std::string>(app, "--format", "Input format for files: ntriples, turtle or snapshot",
                       [](RunConfig& c, const std::string& v) { c.format = parse_format_name(v); })
        ->check(CLI::IsMember({"ntriples", "turtle", "snapshot"}));
    o.add<std::string>(app, "--endpoint", "Inputs that are SPARQL endpoint URLs: none, source, target, both",
                       [](RunConfig& c, const std::string& v) { c.endpoint = v; })
        ->check(CLI::IsMember({"none", "source", "target", "both"}));
    o.add<std::size_t>(app, "--page-size", "SPARQL page size",
                       [](RunConfig& c, std::size_t v) { c.page_size = v; });
  }
  if (groups & kEmbedder) {
    o.add<std::string>(app, "--embedder", "Label embedding provider: local or remote",
                       [](RunConfig& c, const std::string& v) { c.embedder = parse_embedder(v); })
        ->check(CLI::IsMember({"local", "remote"}));
    o.add<std::string>(app, "--embedder-url", "Base URL of the embedding service (remote embedder)",
                       [](RunConfig& c, const std::string& v) { c.embedder_url = v; });
    o.add<std::uint64_t>(app, "--seed", "Seed of the local embedder's hash",
                         [](RunConfig& c, std::uint64_t v) { c.seed = v; });
  }
  if (groups & kIteration) {
    o.add<std::size_t>(app, "--k-top", "Candidate targets per source entity in each phase",
                       [](RunConfig& c, std::size_t v) { c.k_top = v; });
    o.add<int>(app, "--max-iters", "Iteration cap, 1 to 10", [](RunConfig& c, int v) { c.max_iterations = v; });
  }
  if (groups & kEntityThreshold) {
    o.add<double>(app, "--threshold", "Entity score threshold",
                  [](RunConfig& c, double v) { c.thresholds.entity = v; });
  }
  if (groups & kTripleThresholds) {
    o.add<double>(app, "--compatible-threshold", "Triple compatibility threshold",
                  [](RunConfig& c, double v) { c.thresholds.compatible = v; });
    o.add<double>(app, "--divergent-threshold", "Triple divergence threshold",
                  [](RunConfig& c, double v) { c.thresholds.divergent = v; });
  }
  if (groups & kOutput) {
    o.add<std::string>(app, "--output-dir", "Directory for output files",
                       [](RunConfig& c, const std::string& v) { c.output_dir = v; });
  }
  o.add<std::size_t>(app, "--threads", "Worker threads (0: one per hardware thread); never changes results",
                     [](RunConfig& c, std::size_t v) { c.threads = v; });
}

std::string config_footer() {
  std::string text = "Config file keys (a JSON object; unknown keys are errors, flags override):\n";
  for (const auto& key : config_keys()) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "  %-24s %s\n", key.name, key.help);
    text += buf;
  }
  return text;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"source", "source graph path or endpoint URL"},
      {"target", "target graph path or endpoint URL"},
      {"format", "ntriples, turtle or snapshot (default: by extension)"},
      {"endpoint", "none, source, target or both (default none)"},
      {"page_size", "SPARQL page size (default 10000)"},
      {"label_predicates", "array of label predicate IRIs (default rdfs:label, skos labels)"},
      {"embedder", "local or remote (default local)"},
      {"embedder_url", "embedding service base URL"},
      {"k_top", "top-k candidates per source (default 10)"},
      {"max_iterations", "iteration cap in [1, 10] (default 10)"},
      {"threshold", "entity score threshold (default 0.90)"},
      {"compatible_threshold", "triple compatibility threshold (default 0.60)"},
      {"divergent_threshold", "triple divergence threshold (default 0.25)"},
      {"categorical_threshold", "unique-ratio bound for categorical predicates (default 0.05)"},
      {"categorical_min_support", "minimum triples for a categorical predicate (default 50)"},
      {"common_literal_cap", "skip literals carried by more triples than this (default 1000)"},
      {"output_dir", "output directory (default .)"},
      {"seed", "local embedder seed (64-bit unsigned)"},
      {"threads", "worker threads, 0 for one per hardware thread"},
  };
  return keys;
}

void apply_config_json(RunConfig& config, std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      apply_key(config, key, value);
    } catch (const Json::exception& e) {
      config_error("config key '" + key + "': " + e.what());
    }
  }
}

void validate(const RunConfig& c) {
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) config_error(std::string(name) + " must be in [0, 1]");
  };
  unit(c.thresholds.entity, "threshold");
  unit(c.thresholds.compatible, "compatible_threshold");
  unit(c.thresholds.divergent, "divergent_threshold");
  unit(c.categorical.threshold, "categorical_threshold");
  if (c.max_iterations < 1 || c.max_iterations > 10) config_error("max_iterations must be in [1, 10]");
  if (c.k_top < 1) config_error("k_top must be at least 1");
  if (c.page_size < 1) config_error("page_size must be at least 1");
  if (c.common_literal_cap < 1) config_error("common_literal_cap must be at least 1");
  if (std::find(std::begin(kEndpointChoices), std::end(kEndpointChoices), c.endpoint) == std::end(kEndpointChoices))
    config_error("endpoint must be none, source, target or both");
  if (c.embedder == EmbedderKind::Remote && c.embedder_url.empty())
    config_error("the remote embedder needs embedder_url");
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knowledge graph alignment: entity and triple matching with divergence detection", "ftm"};
  app.require_subcommand(1);
  app.footer(config_footer());

  Overrides overrides;
  std::string config_path;
  std::string mappings_path;
  EvalOptions eval;
  GoldOptions gold;

  auto* match = app.add_subcommand("match", "Align two graphs; writes entity and triple mappings and a run report");
  add_run_options(match, kSource | kTarget | kEmbedder | kIteration | kEntityThreshold | kTripleThresholds | kOutput,
                  overrides, config_path);

  auto* diverge = app.add_subcommand("diverge", "Classify triple pairs of mapped entities; writes divergences.tsv");
  add_run_options(diverge, kSource | kTarget | kEmbedder | kEntityThreshold | kTripleThresholds | kOutput, overrides,
                  config_path);
  diverge->add_option("--mappings", mappings_path, "Entity mappings (default <output-dir>/entity_mappings.tsv)");

  auto* ev = app.add_subcommand("eval", "Score predictions against a gold standard");
  add_run_options(ev, kEntityThreshold | kTripleThresholds, overrides, config_path);
  ev->add_option("--predictions", eval.predictions, "entity_mappings.tsv, or triple mappings with --triples")
      ->required();
  ev->add_option("--gold", eval.gold, "Gold standard: TSV or OAEI alignment XML; triple gold with --triples")
      ->required();
  ev->add_option("--k", eval.k_list, "Comma-separated hit@k cut-offs, e.g. 1,10");
  ev->add_flag("--sweep", eval.sweep, "Search the threshold grid for the best F-measure");
  ev->add_option("--step", eval.step, "Sweep grid step in (0, 0.5]");
  ev->add_option("--triples", eval.triples, "Evaluate triple mappings for one class: compatible or divergent")
      ->check(CLI::IsMember({"compatible", "divergent"}));
  ev->add_flag("--json", eval.json, "Print the report as JSON");

  auto* stats = app.add_subcommand("stats", "Per-predicate functionality statistics of one graph");
  add_run_options(stats, kSource, overrides, config_path);

  auto* build = app.add_subcommand("build-triple-gold", "Auto-labeled triple pairs from an entity gold standard");
  add_run_options(build, kSource | kTarget | kOutput, overrides, config_path);
  build->add_option("--gold", gold.gold, "Entity gold standard (TSV or OAEI XML)")->required();
  build->add_option("--predicate-gold", gold.predicate_gold, "Predicate gold standard (TSV or OAEI XML)");
  build->add_option("--fun-min", gold.fun_min, "Minimum predicate functionality on both sides");

  for (auto* sub : {match, diverge, ev, stats, build}) sub->footer(config_footer());

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) apply_config_json(config, read_file(config_path, ErrorCategory::Config, "config"));
    overrides.apply(config);
    validate(config);
    if (match->parsed()) return cmd_match(config, out);
    if (diverge->parsed()) return cmd_diverge(config, mappings_path, out);
    if (ev->parsed()) return cmd_eval(config, eval, out);
    if (stats->parsed()) return cmd_stats(config, out);
    return cmd_build_triple_gold(config, gold, out);
  } catch (const Error& e) {
    err << "error [" << to_string(e.category()) << "]: " << e.what() << "\n";
    return e.category() == ErrorCategory::Internal ? 1 : 2;
  } catch (const std::exception& e) {
    err << "error [internal]: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ftm
