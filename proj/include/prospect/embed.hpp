#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace prospect {

/// Dense row-major float32 matrix, one row per text.
///
/// Construction rejects NaN/Inf entries, a data length that is not
/// rows * dim, and dim < 2.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data);
  /// Zero-filled matrix.
  EmbeddingMatrix(std::size_t rows, std::size_t dim);

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }
  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<const float> data() const { return data_; }

  bool operator==(const EmbeddingMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

enum class EmbedderKind { Lexical, Service, Cache };

std::string_view to_string(EmbedderKind kind);
EmbedderKind parse_embedder_kind(std::string_view name);

struct EmbedderConfig {
  EmbedderKind kind = EmbedderKind::Lexical;
  std::size_t dim = 64;  // lexical only
  std::uint64_t seed = 42;
  std::optional<std::string> service_url;
  std::size_t batch_size = 64;
  std::size_t max_in_flight = 4;  // concurrent service batches
  std::filesystem::path cache_path;  // cache only

  /// Throws ContractError when the kind-specific requirements are not met.
  void validate() const;
};

/// Provider contract: row i of the result depends only on texts[i] and the
/// provider's configuration.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual EmbeddingMatrix embed(std::span<const std::string> texts) const = 0;
};

/// Signed feature hashing of lowercase tokens (edge punctuation stripped),
/// L2-normalized. A text without tokens maps to the zero vector.
class LexicalEmbedder final : public Embedder {
 public:
  LexicalEmbedder(std::size_t dim, std::uint64_t seed);
  EmbeddingMatrix embed(std::span<const std::string> texts) const override;

  /// Bucket and sign a token hashes to; exposed for tests.
  std::pair<std::size_t, float> feature(std::string_view token) const;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

/// Serves rows of a precomputed matrix (the binary cache format). The text
/// list must have exactly as many entries as the matrix has rows.
class CachedEmbedder final : public Embedder {
 public:
  explicit CachedEmbedder(EmbeddingMatrix matrix) : matrix_(std::move(matrix)) {}
  EmbeddingMatrix embed(std::span<const std::string> texts) const override;

 private:
  EmbeddingMatrix matrix_;
};

/// Client for the `POST /embed` sentence-embedding service. Vectors are used
/// exactly as returned.
struct RetryPolicy {
  int attempts = 3;
  int initial_backoff_ms = 250;
};

class ServiceEmbedder final : public Embedder {
 public:
  using Retry = RetryPolicy;

  ServiceEmbedder(std::string url, std::size_t batch_size, std::size_t max_in_flight,
                  Retry retry = {});
  EmbeddingMatrix embed(std::span<const std::string> texts) const override;

 private:
  std::vector<std::vector<float>> post_batch(std::span<const std::string> batch,
                                             std::size_t& dim) const;

  std::string scheme_host_port_;
  std::string base_path_;
  std::size_t batch_size_;
  std::size_t max_in_flight_;
  Retry retry_;
};

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config);

/// Checks the texts precondition, then delegates to the configured provider.
EmbeddingMatrix embed_texts(std::span<const std::string> texts, const EmbedderConfig& config);

/// Cosine similarity with double accumulation; 0 when either norm is zero.
/// Throws ContractError on a dimension mismatch.
double cosine_similarity(std::span<const float> a, std::span<const float> b);
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Cache file: "PRSP", u32 version (1), u32 rows, u32 dim, rows*dim f32; all little-endian.
void write_cache(const EmbeddingMatrix& m, std::ostream& out);
EmbeddingMatrix read_cache(std::istream& in);
void save_cache(const EmbeddingMatrix& m, const std::filesystem::path& path);
EmbeddingMatrix load_cache(const std::filesystem::path& path);

}  // namespace prospect
