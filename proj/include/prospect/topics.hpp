#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "prospect/embed.hpp"
#include "prospect/segment.hpp"

namespace prospect {

// ---------------------------------------------------------------------------
// Dimensionality reduction

struct Reduction {
  EmbeddingMatrix matrix;
  /// Fraction of total variance captured by each kept axis; all zero for
  /// degenerate input.
  std::vector<double> explained_variance_ratio;
};

/// Pluggable reducer so that a manifold method can replace PCA.
class Reducer {
 public:
  virtual ~Reducer() = default;
  virtual Reduction reduce(const EmbeddingMatrix& x, std::size_t n_components,
                           std::uint64_t seed) const = 0;
};

/// Mean-centred projection onto the leading principal axes. Each axis is
/// oriented so that its largest-magnitude loading is positive; the seed is
/// accepted for interface compatibility and unused.
class PcaReducer final : public Reducer {
 public:
  Reduction reduce(const EmbeddingMatrix& x, std::size_t n_components,
                   std::uint64_t seed) const override;
};

EmbeddingMatrix reduce_dimensions(const EmbeddingMatrix& x, std::size_t n_components,
                                  std::uint64_t seed);

// ---------------------------------------------------------------------------
// Density clustering

struct ClusterAssignment {
  static constexpr int kNoise = -1;

  std::vector<int> labels;

  /// Number of distinct non-noise labels (labels are dense 0..K-1).
  std::size_t cluster_count() const;
  std::size_t noise_count() const;

  bool operator==(const ClusterAssignment&) const = default;
};

/// HDBSCAN: core distance to the min_samples-th nearest point (the point
/// itself counts as the first), mutual reachability, minimum spanning tree,
/// condensed single-linkage hierarchy and excess-of-mass selection.
/// Cluster labels are numbered in order of their lowest member index.
ClusterAssignment cluster_density(const EmbeddingMatrix& x, std::size_t min_cluster_size,
                                  std::size_t min_samples);

// ---------------------------------------------------------------------------
// Class-based TF-IDF

/// Vectorizer tokens: lowercase, edge punctuation stripped, stopwords kept,
/// tokens longer than 40 bytes dropped.
std::vector<std::string> vectorizer_tokens(std::string_view text);

class Vocabulary {
 public:
  Vocabulary() = default;
  /// Sorts and deduplicates `terms`.
  explicit Vocabulary(std::vector<std::string> terms);

  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const std::string& term(std::size_t i) const { return terms_[i]; }
  std::span<const std::string> terms() const { return terms_; }
  std::optional<std::size_t> index(std::string_view term) const;

  bool operator==(const Vocabulary&) const = default;

 private:
  std::vector<std::string> terms_;
};

struct CtfidfResult {
  Vocabulary vocabulary;
  /// K rows (one per cluster label) by |V| columns.
  std::vector<std::vector<double>> weights;
};

/// W(t, c) = tf(t, c) * ln(1 + A / f(t)) over non-noise documents, where A is
/// the mean token count per cluster and f(t) the count of t over all clusters.
CtfidfResult ctfidf(std::span<const std::string> documents, const ClusterAssignment& labels);

using WordWeight = std::pair<std::string, double>;

/// Up to k positive-weight terms, weight descending, ties lexicographic.
std::vector<WordWeight> top_words(std::span<const double> weights, const Vocabulary& vocabulary,
                                  std::size_t k = 10);

// ---------------------------------------------------------------------------
// Topic model

struct FitParams {
  std::size_t n_components = 5;
  std::size_t min_cluster_size = 10;
  std::size_t min_samples = 5;
  double merge_threshold = 0.915;
  std::uint64_t seed = 42;

  void validate() const;
  bool operator==(const FitParams&) const = default;
};

struct Topic {
  int topic_id = 0;
  std::vector<WordWeight> word_weights;  // top 10
  std::vector<std::size_t> member_doc_ids;  // ascending

  bool operator==(const Topic&) const = default;
};

struct TopicModel {
  std::vector<Document> documents;
  EmbeddingMatrix embeddings;
  EmbedderConfig embedder;
  Vocabulary vocabulary;
  ClusterAssignment assignment;
  std::vector<Topic> topics;
  FitParams params;

  const Topic& topic(int topic_id) const;
};

/// Builds vocabulary and topics from final labels. Labels must be dense.
TopicModel assemble_model(std::vector<Document> documents, EmbeddingMatrix embeddings,
                          EmbedderConfig embedder, ClusterAssignment assignment, FitParams params);

using SparseRow = std::vector<std::pair<std::size_t, double>>;

/// Maps groups of original cluster ids to one representation row per group.
using Representer =
    std::function<std::vector<SparseRow>(const std::vector<std::vector<std::size_t>>& groups)>;

struct MergeTrace {
  std::vector<std::size_t> group_of;  // original cluster -> final dense group id
  std::size_t group_count = 0;
  std::size_t iterations = 0;
};

/// Two representations count as exceeding the threshold only when their
/// cosine is above it by more than this; a pair at the threshold in exact
/// arithmetic does not merge despite rounding.
inline constexpr double kMergeTolerance = 1e-12;

/// Iterative pairwise merging: while the most similar pair of groups has
/// cosine > threshold, fuse it (lowest id pair on ties) and recompute every
/// representation.
MergeTrace merge_groups(std::size_t cluster_count, const Representer& represent, double threshold);

/// Merges topics whose L2-normalized c-TF-IDF rows are more similar than
/// `threshold`, then re-densifies topic ids.
TopicModel merge_topics(const TopicModel& model, double threshold = 0.915);

/// embed -> reduce -> cluster -> c-TF-IDF -> merge.
TopicModel fit(std::vector<Document> documents, const EmbedderConfig& embedder,
               const FitParams& params, const Reducer& reducer = PcaReducer{});

/// Same pipeline with a caller-supplied provider; `embedder_config` is only
/// recorded in the model.
TopicModel fit(std::vector<Document> documents, const Embedder& embedder,
               const EmbedderConfig& embedder_config, const FitParams& params,
               const Reducer& reducer = PcaReducer{});

}  // namespace prospect
