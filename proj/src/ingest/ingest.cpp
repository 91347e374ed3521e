#include "ftm/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "ftm/error.hpp"
#include "ftm/rdf_parser.hpp"
#include "ftm/snapshot.hpp"

namespace ftm {

RdfFormat format_from_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".nt" || ext == ".ntriples") return RdfFormat::NTriples;
  if (ext == ".ttl" || ext == ".turtle") return RdfFormat::Turtle;
  if (ext == ".snap" || ext == ".ftmsnap") return RdfFormat::Snapshot;
  throw Error(ErrorCategory::Config, "cannot infer RDF format from extension of " + path.string() +
                                         "; pass --format");
}

RdfFormat parse_format_name(std::string_view name) {
  if (name == "ntriples" || name == "nt") return RdfFormat::NTriples;
  if (name == "turtle" || name == "ttl") return RdfFormat::Turtle;
  if (name == "snapshot") return RdfFormat::Snapshot;
  throw Error(ErrorCategory::Config, "unknown format '" + std::string(name) + "' (expected ntriples, turtle or snapshot)");
}

namespace {

KnowledgeGraph load_file(const FileSource& file, const std::vector<Iri>& label_predicates) {
  const RdfFormat format = file.format ? *file.format : format_from_extension(file.path);
  if (format == RdfFormat::Snapshot) return snapshot_load(file.path);

  std::ifstream in(file.path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::Ingest, "cannot open " + file.path.string());
  GraphBuilder builder(label_predicates);
  auto sink = [&builder](Triple&& t) { builder.add(t); };
  try {
    if (format == RdfFormat::NTriples) {
      parse_ntriples(in, sink);
    } else {
      parse_turtle(in, sink, "file://" + std::filesystem::absolute(file.path).string());
    }
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.byte_offset(), file.path.string() + ": " + e.what());
  }
  return std::move(builder).build();
}

}  // namespace

KnowledgeGraph load_graph(const GraphSource& source, const std::vector<Iri>& label_predicates) {
  if (const auto* file = std::get_if<FileSource>(&source)) return load_file(*file, label_predicates);
  const auto& endpoint = std::get<EndpointSource>(source);
  GraphBuilder builder(label_predicates);
  fetch_endpoint(endpoint, [&builder](Triple&& t) { builder.add(t); });
  return std::move(builder).build();
}

CommonLiteralSet common_literals(const KnowledgeGraph& left, const KnowledgeGraph& right) {
  using Key = std::pair<std::string_view, std::string_view>;
  auto key_of = [](const LiteralValue& v) {
    return Key(v.raw, v.datatype ? std::string_view(v.datatype->str()) : std::string_view());
  };
  std::map<Key, std::vector<LiteralId>> left_index;
  for (LiteralId id = 0; id < left.literal_count(); ++id) left_index[key_of(left.literal(id))].push_back(id);

  std::map<Key, std::pair<std::vector<LiteralId>, std::vector<LiteralId>>> matched;
  for (LiteralId id = 0; id < right.literal_count(); ++id) {
    Key k = key_of(right.literal(id));
    auto it = left_index.find(k);
    if (it == left_index.end()) continue;
    auto& entry = matched[k];
    if (entry.first.empty()) entry.first = it->second;
    entry.second.push_back(id);
  }

  CommonLiteralSet out;
  out.values.reserve(matched.size());
  for (auto& [k, ids] : matched) {
    CommonLiteral c;
    const LiteralValue& sample = left.literal(ids.first.front());
    c.raw = sample.raw;
    c.datatype = sample.datatype;
    c.left_ids = std::move(ids.first);
    c.right_ids = std::move(ids.second);
    for (LiteralId id : c.left_ids) {
      auto ts = left.triples_with_literal(id);
      out.left_triples.insert(out.left_triples.end(), ts.begin(), ts.end());
    }
    for (LiteralId id : c.right_ids) {
      auto ts = right.triples_with_literal(id);
      out.right_triples.insert(out.right_triples.end(), ts.begin(), ts.end());
    }
    out.values.push_back(std::move(c));
  }
  std::sort(out.left_triples.begin(), out.left_triples.end());
  std::sort(out.right_triples.begin(), out.right_triples.end());
  return out;
}

}  // namespace ftm
