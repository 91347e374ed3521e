#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ftm/graph.hpp"
#include "ftm/sparql.hpp"

namespace ftm {

enum class RdfFormat { NTriples, Turtle, Snapshot };

/// Maps a file extension (.nt, .ttl, .snap) to a format. Throws Error(Config) when unknown.
RdfFormat format_from_extension(const std::filesystem::path& path);
/// Parses "ntriples", "turtle" or "snapshot". Throws Error(Config) when unknown.
RdfFormat parse_format_name(std::string_view name);

struct FileSource {
  std::filesystem::path path;
  std::optional<RdfFormat> format;  // overrides the extension
};

using GraphSource = std::variant<FileSource, EndpointSource>;

/// Loads a graph. Files are parsed as a stream. Labels are taken from `label_predicates`; nodes
/// without any such label get a label derived from their IRI. Snapshots carry their own labels.
KnowledgeGraph load_graph(const GraphSource& source,
                          const std::vector<Iri>& label_predicates = default_label_predicates());

/// One literal value, keyed by lexical form and datatype, that occurs as an object in both graphs.
struct CommonLiteral {
  std::string raw;
  std::optional<Iri> datatype;
  std::vector<LiteralId> left_ids;   // every language variant present on the left
  std::vector<LiteralId> right_ids;
};

struct CommonLiteralSet {
  std::vector<CommonLiteral> values;  // ordered by (raw, datatype)
  std::vector<TripleId> left_triples;   // ascending; triples whose object is a common literal
  std::vector<TripleId> right_triples;
};

CommonLiteralSet common_literals(const KnowledgeGraph& left, const KnowledgeGraph& right);

}  // namespace ftm
