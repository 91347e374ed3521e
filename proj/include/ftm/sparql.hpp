#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "ftm/rdf_parser.hpp"

namespace ftm {

struct EndpointSource {
  std::string url;
  std::size_t page_size = 10000;
  std::optional<Iri> named_graph;
  int retries = 3;
  std::chrono::milliseconds backoff{250};  // doubled after every failed attempt
  std::size_t max_in_flight = 2;
  std::chrono::milliseconds timeout{60000};
};

/// SELECT ?s ?p ?o [FROM <g>] WHERE { ?s ?p ?o } ORDER BY ?s ?p ?o LIMIT n OFFSET k
std::string build_page_query(const EndpointSource& source, std::size_t offset);

/// Decodes a SPARQL 1.1 JSON result set with bindings s, p, o. Returns the number of rows.
std::size_t parse_sparql_json(std::string_view body, const TripleSink& sink);

/// Pages through the endpoint until a short page. Pages may be fetched concurrently but are
/// delivered to `sink` strictly in page order. Throws EndpointError once retries are exhausted.
void fetch_endpoint(const EndpointSource& source, const TripleSink& sink);

}  // namespace ftm
