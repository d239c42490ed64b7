#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "ctfidf_internal.hpp"
#include "prospect/error.hpp"
#include "prospect/topics.hpp"

namespace prospect {

void FitParams::validate() const {
  if (n_components < 2) throw ContractError("n_components must be at least 2");
  if (min_cluster_size < 2) throw ContractError("min_cluster_size must be at least 2");
  if (min_samples < 1 || min_samples > min_cluster_size) {
    throw ContractError("min_samples must lie in [1, min_cluster_size]");
  }
  if (!(merge_threshold > 0.0 && merge_threshold <= 1.0)) {
    throw ContractError("merge_threshold must lie in (0, 1]");
  }
}

const Topic& TopicModel::topic(int topic_id) const {
  auto it = std::find_if(topics.begin(), topics.end(),
                         [&](const Topic& t) { return t.topic_id == topic_id; });
  if (it == topics.end()) throw LookupError("unknown topic id " + std::to_string(topic_id));
  return *it;
}

namespace {

void check_dense_labels(const ClusterAssignment& a, std::size_t n_docs) {
  if (a.labels.size() != n_docs) {
    throw ContractError(std::to_string(a.labels.size()) + " labels for " +
                        std::to_string(n_docs) + " documents");
  }
  const std::size_t k = a.cluster_count();
  std::vector<char> seen(k, 0);
  for (int l : a.labels) {
    if (l < ClusterAssignment::kNoise) throw ContractError("invalid label " + std::to_string(l));
    if (l >= 0) seen[static_cast<std::size_t>(l)] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw ContractError("cluster labels are not dense");
  }
}

std::vector<std::string> texts_of(const std::vector<Document>& docs) {
  std::vector<std::string> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(d.text);
  return out;
}

void normalize(SparseRow& row) {
  double norm = 0.0;
  for (const auto& [_, w] : row) norm += w * w;
  norm = std::sqrt(norm);
  if (norm == 0.0) return;
  for (auto& [_, w] : row) w /= norm;
}

}  // namespace

TopicModel assemble_model(std::vector<Document> documents, EmbeddingMatrix embeddings,
                          EmbedderConfig embedder, ClusterAssignment assignment, FitParams params) {
  check_dense_labels(assignment, documents.size());
  TopicModel model;
  const std::size_t k = assignment.cluster_count();
  if (k > 0) {
    const auto texts = texts_of(documents);
    auto result = ctfidf(texts, assignment);
    model.vocabulary = std::move(result.vocabulary);
    model.topics.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
      model.topics[c].topic_id = static_cast<int>(c);
      model.topics[c].word_weights = top_words(result.weights[c], model.vocabulary, 10);
    }
    for (std::size_t i = 0; i < assignment.labels.size(); ++i) {
      const int l = assignment.labels[i];
      if (l >= 0) model.topics[static_cast<std::size_t>(l)].member_doc_ids.push_back(documents[i].doc_id);
    }
  }
  model.documents = std::move(documents);
  model.embeddings = std::move(embeddings);
  model.embedder = std::move(embedder);
  model.assignment = std::move(assignment);
  model.params = params;
  return model;
}

MergeTrace merge_groups(std::size_t cluster_count, const Representer& represent, double threshold) {
  std::vector<std::vector<std::size_t>> groups(cluster_count);
  for (std::size_t c = 0; c < cluster_count; ++c) groups[c] = {c};

  MergeTrace trace;
  std::vector<double> dense;
  while (groups.size() >= 2) {
    auto rows = represent(groups);
    if (rows.size() != groups.size()) {
      throw ContractError("representer returned " + std::to_string(rows.size()) + " rows for " +
                          std::to_string(groups.size()) + " groups");
    }
    std::size_t width = 0;
    for (auto& r : rows) {
      normalize(r);
      for (const auto& [idx, _] : r) width = std::max(width, idx + 1);
    }
    dense.assign(width, 0.0);

    double best = -2.0;
    std::size_t bi = 0;
    std::size_t bj = 0;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      for (const auto& [idx, w] : rows[i]) dense[idx] = w;
      for (std::size_t j = i + 1; j < rows.size(); ++j) {
        double dot = 0.0;
        for (const auto& [idx, w] : rows[j]) dot += dense[idx] * w;
        if (dot > best) {
          best = dot;
          bi = i;
          bj = j;
        }
      }
      for (const auto& [idx, _] : rows[i]) dense[idx] = 0.0;
    }
    if (!(best > threshold + kMergeTolerance)) break;

    spdlog::debug("merging topics {} and {} (similarity {:.6f})", bi, bj, best);
    groups[bi].insert(groups[bi].end(), groups[bj].begin(), groups[bj].end());
    groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(bj));
    ++trace.iterations;
  }

  trace.group_of.assign(cluster_count, 0);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (auto c : groups[g]) trace.group_of[c] = g;
  }
  trace.group_count = groups.size();
  return trace;
}

TopicModel merge_topics(const TopicModel& model, double threshold) {
  const std::size_t k = model.assignment.cluster_count();
  TopicModel out = model;
  out.params.merge_threshold = threshold;
  if (k < 2) return out;

  const auto texts = texts_of(model.documents);
  const auto counts = detail::count_classes(texts, model.assignment);
  const auto trace = merge_groups(
      k, [&](const auto& groups) { return detail::weigh_groups(counts, groups); }, threshold);
  if (trace.group_count == k) return out;

  ClusterAssignment merged = model.assignment;
  for (auto& l : merged.labels) {
    if (l >= 0) l = static_cast<int>(trace.group_of[static_cast<std::size_t>(l)]);
  }
  spdlog::debug("merged {} topics into {}", k, trace.group_count);
  return assemble_model(model.documents, model.embeddings, model.embedder, std::move(merged),
                        out.params);
}

namespace {

template <typename F>
auto run_stage(const char* stage, F&& f) {
  try {
    return f();
  } catch (const FitError&) {
    throw;
  } catch (const std::exception& e) {
    throw FitError(stage, e.what());
  }
}

}  // namespace

TopicModel fit(std::vector<Document> documents, const Embedder& embedder,
               const EmbedderConfig& embedder_config, const FitParams& params,
               const Reducer& reducer) {
  params.validate();
  if (documents.size() < params.min_cluster_size) {
    throw ContractError("fit needs at least min_cluster_size (" +
                        std::to_string(params.min_cluster_size) + ") documents, got " +
                        std::to_string(documents.size()));
  }
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (documents[i].doc_id != i) throw ContractError("document ids must be dense and ordered");
  }

  const auto texts = texts_of(documents);
  auto embeddings = run_stage("embed", [&] {
    auto m = embedder.embed(texts);
    if (m.rows() != texts.size()) throw ProtocolError("embedder returned the wrong row count");
    return m;
  });
  const auto reduced = run_stage("reduce", [&] {
    return reducer.reduce(embeddings, params.n_components, params.seed).matrix;
  });
  auto assignment = run_stage("cluster", [&] {
    return cluster_density(reduced, params.min_cluster_size, params.min_samples);
  });
  spdlog::info("clustered {} documents into {} clusters ({} noise)", documents.size(),
               assignment.cluster_count(), assignment.noise_count());
  auto model = run_stage("c-tf-idf", [&] {
    return assemble_model(std::move(documents), std::move(embeddings), embedder_config,
                          std::move(assignment), params);
  });
  return run_stage("merge", [&] { return merge_topics(model, params.merge_threshold); });
}

TopicModel fit(std::vector<Document> documents, const EmbedderConfig& embedder,
               const FitParams& params, const Reducer& reducer) {
  const auto provider = make_embedder(embedder);
  return fit(std::move(documents), *provider, embedder, params, reducer);
}

}  // namespace prospect
