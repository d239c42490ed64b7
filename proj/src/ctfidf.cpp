#include <algorithm>
#include <cmath>
#include <map>

#include "ctfidf_internal.hpp"
#include "prospect/error.hpp"
#include "prospect/text.hpp"

namespace prospect {

std::vector<std::string> vectorizer_tokens(std::string_view text) {
  auto tokens = text::tokenize(text);
  std::erase_if(tokens, [](const std::string& t) { return t.size() > 40; });
  return tokens;
}

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
  std::sort(terms_.begin(), terms_.end());
  terms_.erase(std::unique(terms_.begin(), terms_.end()), terms_.end());
}

std::optional<std::size_t> Vocabulary::index(std::string_view term) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), term);
  if (it == terms_.end() || *it != term) return std::nullopt;
  return static_cast<std::size_t>(it - terms_.begin());
}

namespace detail {

ClassCounts count_classes(std::span<const std::string> documents, const ClusterAssignment& labels) {
  if (labels.labels.size() != documents.size()) {
    throw ContractError("c-TF-IDF: " + std::to_string(labels.labels.size()) + " labels for " +
                        std::to_string(documents.size()) + " documents");
  }
  const std::size_t k = labels.cluster_count();
  if (k == 0) throw ContractError("c-TF-IDF needs at least one non-noise cluster");

  std::vector<std::map<std::string, double>> raw(k);
  ClassCounts out;
  for (std::size_t i = 0; i < documents.size(); ++i) {
    const int label = labels.labels[i];
    if (label == ClusterAssignment::kNoise) continue;
    if (label < 0) throw ContractError("c-TF-IDF: invalid label " + std::to_string(label));
    for (auto& tok : vectorizer_tokens(documents[i])) {
      raw[static_cast<std::size_t>(label)][std::move(tok)] += 1.0;
      out.total_tokens += 1.0;
    }
  }
  std::vector<std::string> terms;
  for (const auto& m : raw) {
    for (const auto& [t, _] : m) terms.push_back(t);
  }
  out.vocabulary = Vocabulary(std::move(terms));
  if (out.vocabulary.empty()) throw ContractError("c-TF-IDF: empty vocabulary");

  out.term_totals.assign(out.vocabulary.size(), 0.0);
  out.per_cluster.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    for (const auto& [t, count] : raw[c]) {
      const auto idx = *out.vocabulary.index(t);
      out.per_cluster[c].emplace_back(idx, count);
      out.term_totals[idx] += count;
    }
  }
  return out;
}

std::vector<SparseRow> weigh_groups(const ClassCounts& counts,
                                    const std::vector<std::vector<std::size_t>>& groups) {
  const double avg_tokens = counts.total_tokens / static_cast<double>(groups.size());
  std::vector<SparseRow> rows;
  rows.reserve(groups.size());
  std::map<std::size_t, double> tf;
  for (const auto& group : groups) {
    tf.clear();
    for (auto c : group) {
      for (const auto& [idx, count] : counts.per_cluster[c]) tf[idx] += count;
    }
    SparseRow row;
    row.reserve(tf.size());
    for (const auto& [idx, count] : tf) {
      row.emplace_back(idx, count * std::log(1.0 + avg_tokens / counts.term_totals[idx]));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

CtfidfResult ctfidf(std::span<const std::string> documents, const ClusterAssignment& labels) {
  const auto counts = detail::count_classes(documents, labels);
  std::vector<std::vector<std::size_t>> groups(counts.per_cluster.size());
  for (std::size_t c = 0; c < groups.size(); ++c) groups[c] = {c};
  const auto sparse = detail::weigh_groups(counts, groups);

  CtfidfResult out{counts.vocabulary, {}};
  out.weights.assign(sparse.size(), std::vector<double>(counts.vocabulary.size(), 0.0));
  for (std::size_t c = 0; c < sparse.size(); ++c) {
    for (const auto& [idx, w] : sparse[c]) out.weights[c][idx] = w;
  }
  return out;
}

std::vector<WordWeight> top_words(std::span<const double> weights, const Vocabulary& vocabulary,
                                  std::size_t k) {
  if (k == 0) throw ContractError("top_words: k must be at least 1");
  if (weights.size() != vocabulary.size()) {
    throw ContractError("top_words: weight row does not match the vocabulary");
  }
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) idx.push_back(i);
  }
  auto better = [&](std::size_t a, std::size_t b) {
    if (weights[a] != weights[b]) return weights[a] > weights[b];
    return vocabulary.term(a) < vocabulary.term(b);
  };
  const std::size_t take = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(), better);
  std::vector<WordWeight> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.emplace_back(vocabulary.term(idx[i]), weights[idx[i]]);
  return out;
}

}  // namespace prospect
