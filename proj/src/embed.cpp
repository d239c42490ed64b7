#include "prospect/embed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "prospect/error.hpp"
#include "prospect/text.hpp"

namespace prospect {

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data)
    : rows_(rows), dim_(dim), data_(std::move(data)) {
  if (dim_ < 2) throw ContractError("embedding dimension must be at least 2");
  if (data_.size() != rows_ * dim_) {
    throw ContractError("embedding data length " + std::to_string(data_.size()) +
                        " != rows * dim (" + std::to_string(rows_ * dim_) + ")");
  }
  for (float v : data_) {
    if (!std::isfinite(v)) throw ContractError("embedding contains NaN or Inf");
  }
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim)
    : EmbeddingMatrix(rows, dim, std::vector<float>(rows * dim, 0.0f)) {}

std::string_view to_string(EmbedderKind kind) {
  switch (kind) {
    case EmbedderKind::Lexical:
      return "lexical";
    case EmbedderKind::Service:
      return "service";
    case EmbedderKind::Cache:
      return "cache";
  }
  return "unknown";
}

EmbedderKind parse_embedder_kind(std::string_view name) {
  const auto lower = text::to_lower(name);
  if (lower == "lexical") return EmbedderKind::Lexical;
  if (lower == "service") return EmbedderKind::Service;
  if (lower == "cache") return EmbedderKind::Cache;
  throw ContractError("unknown embedder kind '" + std::string(name) + "'");
}

void EmbedderConfig::validate() const {
  if (batch_size == 0) throw ContractError("batch_size must be positive");
  switch (kind) {
    case EmbedderKind::Lexical:
      if (dim < 2) throw ContractError("lexical embedder requires dim >= 2");
      break;
    case EmbedderKind::Service:
      if (!service_url || service_url->empty()) {
        throw ContractError("service embedder requires a service URL");
      }
      if (max_in_flight == 0) throw ContractError("max_in_flight must be positive");
      break;
    case EmbedderKind::Cache:
      if (cache_path.empty()) throw ContractError("cache embedder requires a cache path");
      break;
  }
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace

LexicalEmbedder::LexicalEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim_ < 2) throw ContractError("lexical embedder requires dim >= 2");
}

std::pair<std::size_t, float> LexicalEmbedder::feature(std::string_view token) const {
  const std::uint64_t h = splitmix64(fnv1a(token) ^ splitmix64(seed_));
  const auto bucket = static_cast<std::size_t>(h % dim_);
  const float sign = ((h >> 32) & 1u) ? -1.0f : 1.0f;
  return {bucket, sign};
}

EmbeddingMatrix LexicalEmbedder::embed(std::span<const std::string> texts) const {
  std::vector<float> data(texts.size() * dim_, 0.0f);
  std::vector<double> row(dim_);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    for (const auto& tok : text::tokenize(texts[i])) {
      const auto [bucket, sign] = feature(tok);
      row[bucket] += sign;
    }
    double norm = 0.0;
    for (double v : row) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    for (std::size_t j = 0; j < dim_; ++j) {
      data[i * dim_ + j] = static_cast<float>(row[j] / norm);
    }
  }
  return EmbeddingMatrix(texts.size(), dim_, std::move(data));
}

EmbeddingMatrix CachedEmbedder::embed(std::span<const std::string> texts) const {
  if (texts.size() != matrix_.rows()) {
    throw ProtocolError("cache holds " + std::to_string(matrix_.rows()) + " rows but " +
                        std::to_string(texts.size()) + " texts were requested");
  }
  return matrix_;
}

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config) {
  config.validate();
  switch (config.kind) {
    case EmbedderKind::Lexical:
      return std::make_unique<LexicalEmbedder>(config.dim, config.seed);
    case EmbedderKind::Service:
      return std::make_unique<ServiceEmbedder>(*config.service_url, config.batch_size,
                                               config.max_in_flight);
    case EmbedderKind::Cache:
      return std::make_unique<CachedEmbedder>(load_cache(config.cache_path));
  }
  throw ContractError("unknown embedder kind");
}

EmbeddingMatrix embed_texts(std::span<const std::string> texts, const EmbedderConfig& config) {
  if (texts.empty()) throw ContractError("embed_texts needs at least one text");
  for (const auto& t : texts) {
    if (text::trim(t).empty()) throw ContractError("embed_texts got an empty text");
  }
  return make_embedder(config)->embed(texts);
}

namespace {

template <typename T>
double cosine_impl(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) {
    throw ContractError("cosine_similarity: dimension mismatch (" + std::to_string(a.size()) +
                        " vs " + std::to_string(b.size()) + ")");
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i];
    const double y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

constexpr char kMagic[4] = {'P', 'R', 'S', 'P'};
constexpr std::uint32_t kCacheVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                         static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
    throw ParseError(std::string("embedding cache truncated while reading ") + what);
  }
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
}

}  // namespace

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  return cosine_impl(a, b);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  return cosine_impl(a, b);
}

void write_cache(const EmbeddingMatrix& m, std::ostream& out) {
  out.write(kMagic, 4);
  put_u32(out, kCacheVersion);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.dim()));
  for (float v : m.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  if (!out) throw IoError("failed to write embedding cache");
}

EmbeddingMatrix read_cache(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) {
    throw ParseError("embedding cache: bad magic bytes");
  }
  const auto version = get_u32(in, "version");
  if (version != kCacheVersion) {
    throw VersionError("embedding cache: unsupported version " + std::to_string(version));
  }
  const auto rows = get_u32(in, "rows");
  const auto dim = get_u32(in, "dim");
  std::vector<float> data(static_cast<std::size_t>(rows) * dim);
  for (auto& v : data) v = std::bit_cast<float>(get_u32(in, "data"));
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError("embedding cache: trailing bytes after matrix data");
  }
  return EmbeddingMatrix(rows, dim, std::move(data));
}

void save_cache(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_cache(m, out);
}

EmbeddingMatrix load_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_cache(in);
}

}  // namespace prospect
