#include "ftm/embedding.hpp"

#include <cmath>
#include <future>
#include <thread>

#include <json.hpp>

#include "ftm/error.hpp"
#include "ftm/http.hpp"
#include "ftm/text.hpp"

namespace ftm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t seeded_hash(std::u32string_view gram, std::uint64_t seed) {
  std::uint64_t h = 0xCBF29CE484222325ULL ^ splitmix64(seed);
  for (char32_t c : gram) {
    for (int b = 0; b < 4; ++b) {
      h ^= (static_cast<std::uint32_t>(c) >> (8 * b)) & 0xFF;
      h *= 0x100000001B3ULL;
    }
  }
  return splitmix64(h);
}

void normalize_in_place(std::vector<double>& acc, EmbeddingVector& out) {
  double norm = 0.0;
  for (double x : acc) norm += x * x;
  norm = std::sqrt(norm);
  out.values.assign(acc.size(), 0.0f);
  if (norm == 0.0) return;
  for (std::size_t i = 0; i < acc.size(); ++i) out.values[i] = static_cast<float>(acc[i] / norm);
}

}  // namespace

LocalTrigramProvider::LocalTrigramProvider(LocalTrigramConfig config) : config_(config) {
  if (config_.dimension < 16) throw Error(ErrorCategory::Config, "embedding dimension must be at least 16");
}

EmbeddingVector LocalTrigramProvider::embed(const std::string& text) const {
  std::u32string cps = utf8_decode(text);
  for (auto& c : cps) c = to_lower(c);
  std::vector<double> acc(config_.dimension, 0.0);
  std::u32string_view view(cps);
  if (!cps.empty()) {
    if (cps.size() < 3) {
      acc[seeded_hash(view, config_.seed) % config_.dimension] += 1.0;
    } else {
      for (std::size_t i = 0; i + 3 <= cps.size(); ++i) acc[seeded_hash(view.substr(i, 3), config_.seed) % config_.dimension] += 1.0;
    }
  }
  EmbeddingVector out;
  normalize_in_place(acc, out);
  return out;
}

std::vector<EmbeddingVector> LocalTrigramProvider::embed_batch(const std::vector<std::string>& texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

std::string LocalTrigramProvider::model_name() const {
  return "local-trigram-" + std::to_string(config_.dimension);
}

// ---------------------------------------------------------------------------------------------

RemoteProvider::RemoteProvider(RemoteConfig config) : config_(std::move(config)) {
  if (config_.batch_size == 0) throw Error(ErrorCategory::Config, "embedding batch_size must be at least 1");
  while (!config_.base_url.empty() && config_.base_url.back() == '/') config_.base_url.pop_back();
  split_url(config_.base_url);
}

std::string RemoteProvider::model_name() const {
  std::lock_guard<std::mutex> lock(mu_);
  return model_.empty() ? "remote" : model_;
}

namespace {

HttpHeaders auth_headers(const RemoteConfig& config) {
  HttpHeaders headers;
  if (config.auth_token) headers.emplace_back("Authorization", "Bearer " + *config.auth_token);
  return headers;
}

}  // namespace

std::string RemoteProvider::health() const {
  HttpResponse r = http_get(config_.base_url + "/health", auth_headers(config_), config_.timeout);
  if (r.status != 200) throw ProviderError(r.status, 1, "embedding sidecar health check failed" + (r.error.empty() ? "" : ": " + r.error));
  try {
    auto doc = nlohmann::json::parse(r.body);
    if (doc.at("status").get<std::string>() != "ok") throw ProviderError(r.status, 1, "embedding sidecar reports not ok");
    return doc.at("model").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(r.status, 1, std::string("malformed health response: ") + e.what());
  }
}

std::vector<EmbeddingVector> RemoteProvider::embed_chunk(const std::vector<std::string>& texts) const {
  const std::string body = nlohmann::json{{"texts", texts}}.dump();
  const int attempts = config_.retries + 1;
  auto delay = config_.backoff;
  HttpResponse r;
  int attempt = 1;
  for (;; ++attempt) {
    r = http_post(config_.base_url + "/embed", body, "application/json", auth_headers(config_), config_.timeout);
    if (r.status == 200) break;
    if (!is_retryable_status(r.status) || attempt == attempts) {
      throw ProviderError(r.status, attempt, "embedding request failed" + (r.error.empty() ? "" : ": " + r.error));
    }
    std::this_thread::sleep_for(delay);
    delay *= 2;
  }

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(r.body);
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(r.status, attempt, std::string("malformed embedding response: ") + e.what());
  }
  std::vector<EmbeddingVector> out;
  std::string model;
  std::size_t dimension = 0;
  try {
    model = doc.at("model").get<std::string>();
    dimension = doc.at("dimension").get<std::size_t>();
    const auto& vectors = doc.at("vectors");
    if (!vectors.is_array() || vectors.size() != texts.size())
      throw ProviderError(r.status, attempt, "embedding response has " + std::to_string(vectors.size()) +
                                                 " vectors for " + std::to_string(texts.size()) + " texts");
    out.reserve(texts.size());
    for (const auto& v : vectors) {
      if (v.size() != dimension)
        throw ProviderError(r.status, attempt, "embedding protocol error: vector of dimension " +
                                                   std::to_string(v.size()) + ", expected " + std::to_string(dimension));
      std::vector<double> acc = v.get<std::vector<double>>();
      double norm = 0.0;
      for (double x : acc) norm += x * x;
      norm = std::sqrt(norm);
      if (norm != 0.0 && std::abs(norm - 1.0) > 1e-5)
        throw ProviderError(r.status, attempt, "embedding protocol error: vector norm " + std::to_string(norm));
      EmbeddingVector e;
      normalize_in_place(acc, e);
      out.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(r.status, attempt, std::string("unexpected embedding response shape: ") + e.what());
  }

  std::lock_guard<std::mutex> lock(mu_);
  if (dimension_ != 0 && dimension != dimension_)
    throw ProviderError(r.status, attempt, "embedding protocol error: dimension changed from " +
                                               std::to_string(dimension_) + " to " + std::to_string(dimension));
  dimension_ = dimension;
  model_ = model;
  return out;
}

std::vector<EmbeddingVector> RemoteProvider::embed_batch(const std::vector<std::string>& texts) {
  std::vector<std::vector<std::string>> chunks;
  for (std::size_t i = 0; i < texts.size(); i += config_.batch_size) {
    chunks.emplace_back(texts.begin() + static_cast<std::ptrdiff_t>(i),
                        texts.begin() + static_cast<std::ptrdiff_t>(std::min(texts.size(), i + config_.batch_size)));
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  const std::size_t window = std::max<std::size_t>(1, config_.max_in_flight);
  for (std::size_t first = 0; first < chunks.size(); first += window) {
    std::vector<std::future<std::vector<EmbeddingVector>>> wave;
    for (std::size_t c = first; c < std::min(chunks.size(), first + window); ++c) {
      wave.push_back(std::async(std::launch::async, [this, &chunks, c] { return embed_chunk(chunks[c]); }));
    }
    std::exception_ptr error;
    for (auto& f : wave) {
      try {
        auto vs = f.get();
        if (!error) std::move(vs.begin(), vs.end(), std::back_inserter(out));
      } catch (...) {
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  }
  return out;
}

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderConfig& config) {
  if (const auto* local = std::get_if<LocalTrigramConfig>(&config)) return std::make_unique<LocalTrigramProvider>(*local);
  return std::make_unique<RemoteProvider>(std::get<RemoteConfig>(config));
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dimension() != v.dimension())
    throw ContractViolation("cosine of vectors with dimensions " + std::to_string(u.dimension()) + " and " +
                            std::to_string(v.dimension()));
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    dot += static_cast<double>(u.values[i]) * v.values[i];
    nu += static_cast<double>(u.values[i]) * u.values[i];
    nv += static_cast<double>(v.values[i]) * v.values[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::max(-1.0, std::min(1.0, c));
}

}  // namespace ftm
