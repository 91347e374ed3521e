#include "ftm/sparql.hpp"

#include <deque>
#include <future>
#include <thread>

#include <json.hpp>

#include "ftm/error.hpp"
#include "ftm/http.hpp"

namespace ftm {

std::string build_page_query(const EndpointSource& source, std::size_t offset) {
  std::string q = "SELECT ?s ?p ?o ";
  if (source.named_graph) q += "FROM <" + source.named_graph->str() + "> ";
  q += "WHERE { ?s ?p ?o } ORDER BY ?s ?p ?o LIMIT " + std::to_string(source.page_size) + " OFFSET " +
       std::to_string(offset);
  return q;
}

namespace {

using nlohmann::json;

std::string node_value(const json& binding, const char* var) {
  auto it = binding.find(var);
  if (it == binding.end()) throw ParseError(0, 0, std::string("result row lacks ?") + var);
  const std::string type = it->at("type").get<std::string>();
  const std::string value = it->at("value").get<std::string>();
  if (type == "uri") return value;
  if (type == "bnode") return "_:" + value;
  throw ParseError(0, 0, std::string("?") + var + " must be an IRI or blank node, got " + type);
}

Term object_value(const json& binding) {
  auto it = binding.find("o");
  if (it == binding.end()) throw ParseError(0, 0, "result row lacks ?o");
  const std::string type = it->at("type").get<std::string>();
  std::string value = it->at("value").get<std::string>();
  if (type == "uri") return Iri(std::move(value));
  if (type == "bnode") return Iri("_:" + value);
  if (type == "literal" || type == "typed-literal") {
    std::optional<Iri> datatype;
    std::optional<std::string> language;
    if (auto dt = it->find("datatype"); dt != it->end()) datatype = Iri(dt->get<std::string>());
    if (auto lang = it->find("xml:lang"); lang != it->end()) language = lang->get<std::string>();
    if (language && datatype && datatype->str() == vocab::kRdfLangString) datatype.reset();
    return classify_literal(std::move(value), std::move(datatype), std::move(language));
  }
  throw ParseError(0, 0, "unknown term type " + type);
}

}  // namespace

std::size_t parse_sparql_json(std::string_view body, const TripleSink& sink) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw ParseError(0, 0, std::string("malformed SPARQL JSON: ") + e.what());
  }
  try {
    const json& bindings = doc.at("results").at("bindings");
    std::size_t rows = 0;
    for (const json& row : bindings) {
      Iri s(node_value(row, "s"));
      Iri p(node_value(row, "p"));
      sink(Triple{std::move(s), std::move(p), object_value(row)});
      ++rows;
    }
    return rows;
  } catch (const json::exception& e) {
    throw ParseError(0, 0, std::string("unexpected SPARQL JSON shape: ") + e.what());
  }
}

namespace {

std::string fetch_page(const EndpointSource& source, std::size_t offset) {
  const std::string sep = source.url.find('?') == std::string::npos ? "?" : "&";
  const std::string url = source.url + sep + "query=" + percent_encode(build_page_query(source, offset));
  const HttpHeaders headers{{"Accept", "application/sparql-results+json"}};
  auto delay = source.backoff;
  const int attempts = source.retries + 1;
  HttpResponse last;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    last = http_get(url, headers, source.timeout);
    if (last.status >= 200 && last.status < 300) return std::move(last.body);
    if (!is_retryable_status(last.status) || attempt == attempts) {
      throw EndpointError(last.status, attempt,
                          "SPARQL endpoint " + source.url + " failed" + (last.error.empty() ? "" : ": " + last.error));
    }
    std::this_thread::sleep_for(delay);
    delay *= 2;
  }
  throw EndpointError(last.status, attempts, "SPARQL endpoint " + source.url + " failed");
}

}  // namespace

void fetch_endpoint(const EndpointSource& source, const TripleSink& sink) {
  if (source.page_size == 0) throw Error(ErrorCategory::Config, "page_size must be at least 1");
  if (source.retries < 0) throw Error(ErrorCategory::Config, "retries must be non-negative");
  const std::size_t window = std::max<std::size_t>(1, source.max_in_flight);

  std::deque<std::future<std::string>> in_flight;
  std::size_t next_page = 0;
  auto launch = [&] {
    const std::size_t offset = next_page++ * source.page_size;
    in_flight.push_back(std::async(std::launch::async, [&source, offset] { return fetch_page(source, offset); }));
  };

  bool done = false;
  while (!done) {
    while (in_flight.size() < window) launch();
    std::string body = in_flight.front().get();
    in_flight.pop_front();
    std::size_t rows = parse_sparql_json(body, sink);
    done = rows < source.page_size;
  }
  // Pages past the end were speculative; wait for them so no thread outlives `source`.
  for (auto& f : in_flight) {
    try {
      f.get();
    } catch (const Error&) {
    }
  }
}

}  // namespace ftm
