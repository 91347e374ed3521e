#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ftm {

/// Unit-norm vector, or all zeros for empty text.
struct EmbeddingVector {
  std::vector<float> values;
  std::size_t dimension() const { return values.size(); }
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// One vector per input, in input order. Safe to call concurrently.
  virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) = 0;
  virtual std::string model_name() const = 0;
};

struct LocalTrigramConfig {
  std::size_t dimension = 512;
  std::uint64_t seed = 0x5EED5EED5EED5EEDULL;
};

struct RemoteConfig {
  std::string base_url;
  std::chrono::milliseconds timeout{30000};
  std::size_t batch_size = 64;
  std::optional<std::string> auth_token;
  std::size_t max_in_flight = 4;
  int retries = 2;
  std::chrono::milliseconds backoff{200};
};

using ProviderConfig = std::variant<LocalTrigramConfig, RemoteConfig>;

/// Character-trigram hashing. Text is lowercased and split into code points; every trigram
/// (or the whole text when shorter than three code points) increments one bucket chosen by a
/// seeded 64-bit hash, and the result is L2-normalized.
class LocalTrigramProvider final : public EmbeddingProvider {
 public:
  explicit LocalTrigramProvider(LocalTrigramConfig config = {});
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;
  EmbeddingVector embed(const std::string& text) const;
  std::string model_name() const override;

 private:
  LocalTrigramConfig config_;
};

/// Client for the embedding sidecar: POST {base}/embed with {"texts": [...]}, answer
/// {"model", "dimension", "vectors"}; GET {base}/health. Batches go out concurrently up to
/// max_in_flight. Responses are checked for count, dimension and unit norm, then renormalized.
class RemoteProvider final : public EmbeddingProvider {
 public:
  explicit RemoteProvider(RemoteConfig config);
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;
  std::string model_name() const override;
  /// Returns the model name reported by /health. Throws ProviderError when unhealthy.
  std::string health() const;

 private:
  std::vector<EmbeddingVector> embed_chunk(const std::vector<std::string>& texts) const;

  RemoteConfig config_;
  mutable std::mutex mu_;
  mutable std::string model_;
  mutable std::size_t dimension_ = 0;
};

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderConfig& config);

/// Cosine similarity in [-1, 1]; 0 when either side is the zero vector. Throws ContractViolation
/// on a dimension mismatch.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

/// Cosine clamped to [0, 1] for use as a label confidence.
inline double label_cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  double c = cosine(u, v);
  return c < 0.0 ? 0.0 : (c > 1.0 ? 1.0 : c);
}

}  // namespace ftm
