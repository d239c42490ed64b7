#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "prospect/error.hpp"
#include "prospect/report.hpp"

namespace prospect {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

std::ifstream open_in(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("model artifact is missing '" + path.string() + "'");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

ojson parse_json_file(const fs::path& path) {
  auto in = open_in(path);
  try {
    return ojson::parse(in);
  } catch (const ojson::parse_error& e) {
    throw ParseError(path.string() + ": byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

ojson embedder_json(const EmbedderConfig& c) {
  ojson obj;
  obj["kind"] = to_string(c.kind);
  obj["dim"] = c.dim;
  obj["seed"] = c.seed;
  obj["batch_size"] = c.batch_size;
  if (c.service_url) obj["service_url"] = *c.service_url;
  return obj;
}

EmbedderConfig embedder_from_json(const ojson& obj) {
  EmbedderConfig c;
  c.kind = parse_embedder_kind(obj.at("kind").get<std::string>());
  c.dim = obj.at("dim").get<std::size_t>();
  c.seed = obj.at("seed").get<std::uint64_t>();
  c.batch_size = obj.at("batch_size").get<std::size_t>();
  if (obj.contains("service_url")) c.service_url = obj.at("service_url").get<std::string>();
  return c;
}

bool close(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

void export_model(const TopicModel& model, const fs::path& dir) {
  fs::create_directories(dir);

  ojson manifest;
  manifest["version"] = kModelArtifactVersion;
  manifest["params"] = {{"n_components", model.params.n_components},
                        {"min_cluster_size", model.params.min_cluster_size},
                        {"min_samples", model.params.min_samples},
                        {"merge_threshold", model.params.merge_threshold}};
  manifest["seed"] = model.params.seed;
  manifest["embedder"] = embedder_json(model.embedder);
  manifest["counts"] = {{"documents", model.documents.size()},
                        {"topics", model.topics.size()},
                        {"noise", model.assignment.noise_count()}};
  open_out(dir / "manifest.json") << manifest.dump(2) << '\n';

  {
    auto out = open_out(dir / "documents.jsonl");
    write_documents(model.documents, out);
  }
  {
    auto out = open_out(dir / "embeddings.bin");
    write_cache(model.embeddings, out);
  }
  {
    auto out = open_out(dir / "assignments.jsonl");
    for (std::size_t i = 0; i < model.documents.size(); ++i) {
      out << ojson{{"doc_id", model.documents[i].doc_id}, {"topic_id", model.assignment.labels[i]}}.dump()
          << '\n';
    }
  }
  ojson topics = ojson::array();
  for (const auto& t : model.topics) {
    ojson words = ojson::array();
    for (const auto& [term, weight] : t.word_weights) words.push_back(ojson::array({term, weight}));
    topics.push_back({{"topic_id", t.topic_id}, {"words", std::move(words)}, {"size", t.member_doc_ids.size()}});
  }
  open_out(dir / "topics.json") << topics.dump(2) << '\n';
}

TopicModel import_model(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("model directory does not exist: '" + dir.string() + "'");

  const auto manifest = parse_json_file(dir / "manifest.json");
  FitParams params;
  EmbedderConfig embedder;
  std::size_t expected_docs = 0;
  std::size_t expected_topics = 0;
  try {
    const int version = manifest.at("version").get<int>();
    if (version != kModelArtifactVersion) {
      throw VersionError("unsupported model artifact version " + std::to_string(version) +
                         " (expected " + std::to_string(kModelArtifactVersion) + ")");
    }
    const auto& p = manifest.at("params");
    params.n_components = p.at("n_components").get<std::size_t>();
    params.min_cluster_size = p.at("min_cluster_size").get<std::size_t>();
    params.min_samples = p.at("min_samples").get<std::size_t>();
    params.merge_threshold = p.at("merge_threshold").get<double>();
    params.seed = manifest.at("seed").get<std::uint64_t>();
    embedder = embedder_from_json(manifest.at("embedder"));
    expected_docs = manifest.at("counts").at("documents").get<std::size_t>();
    expected_topics = manifest.at("counts").at("topics").get<std::size_t>();
  } catch (const ojson::exception& e) {
    throw SchemaError((dir / "manifest.json").string() + ": " + e.what());
  }
  try {
    params.validate();
  } catch (const ContractError& e) {
    throw ValidationError(std::string("manifest params: ") + e.what());
  }

  std::vector<Document> documents;
  {
    auto in = open_in(dir / "documents.jsonl");
    documents = read_documents(in, (dir / "documents.jsonl").string());
  }
  if (documents.size() != expected_docs) {
    throw ValidationError("documents.jsonl holds " + std::to_string(documents.size()) +
                          " documents, manifest says " + std::to_string(expected_docs));
  }
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (documents[i].doc_id != i) throw ValidationError("document ids are not dense and ordered");
  }

  EmbeddingMatrix embeddings;
  {
    auto in = open_in(dir / "embeddings.bin");
    embeddings = read_cache(in);
  }
  if (embeddings.rows() != documents.size()) {
    throw ValidationError("embeddings.bin has " + std::to_string(embeddings.rows()) +
                          " rows for " + std::to_string(documents.size()) + " documents");
  }

  ClusterAssignment assignment{std::vector<int>(documents.size(), ClusterAssignment::kNoise)};
  {
    auto in = open_in(dir / "assignments.jsonl");
    std::vector<char> seen(documents.size(), 0);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const std::string where = (dir / "assignments.jsonl").string() + ": line " + std::to_string(lineno);
      ojson obj;
      try {
        obj = ojson::parse(line);
      } catch (const ojson::parse_error& e) {
        throw ParseError(where + ": " + e.what());
      }
      long long doc_id = 0;
      int topic_id = 0;
      try {
        doc_id = obj.at("doc_id").get<long long>();
        topic_id = obj.at("topic_id").get<int>();
      } catch (const ojson::exception& e) {
        throw SchemaError(where + ": " + e.what());
      }
      if (doc_id < 0 || static_cast<std::size_t>(doc_id) >= documents.size()) {
        throw ValidationError(where + ": unknown doc_id " + std::to_string(doc_id));
      }
      if (seen[static_cast<std::size_t>(doc_id)]++) {
        throw ValidationError(where + ": doc_id " + std::to_string(doc_id) + " assigned twice");
      }
      if (topic_id < ClusterAssignment::kNoise) {
        throw ValidationError(where + ": invalid topic_id " + std::to_string(topic_id));
      }
      assignment.labels[static_cast<std::size_t>(doc_id)] = topic_id;
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
      throw ValidationError("assignments.jsonl does not cover every document");
    }
  }

  const auto topics_json = parse_json_file(dir / "topics.json");
  std::vector<Topic> stored;
  try {
    for (const auto& t : topics_json) {
      Topic topic;
      topic.topic_id = t.at("topic_id").get<int>();
      for (const auto& w : t.at("words")) {
        topic.word_weights.emplace_back(w.at(0).get<std::string>(), w.at(1).get<double>());
      }
      topic.member_doc_ids.resize(t.at("size").get<std::size_t>());
      stored.push_back(std::move(topic));
    }
  } catch (const ojson::exception& e) {
    throw SchemaError((dir / "topics.json").string() + ": " + e.what());
  }
  if (stored.size() != expected_topics) {
    throw ValidationError("topics.json holds " + std::to_string(stored.size()) +
                          " topics, manifest says " + std::to_string(expected_topics));
  }

  TopicModel model;
  try {
    model = assemble_model(std::move(documents), std::move(embeddings), embedder,
                           std::move(assignment), params);
  } catch (const ContractError& e) {
    throw ValidationError(std::string("assignments: ") + e.what());
  }
  if (model.topics.size() != stored.size()) {
    throw ValidationError("assignments define " + std::to_string(model.topics.size()) +
                          " topics but topics.json lists " + std::to_string(stored.size()));
  }
  for (std::size_t i = 0; i < stored.size(); ++i) {
    const auto& s = stored[i];
    const auto& m = model.topics[i];
    const std::string where = "topic " + std::to_string(i);
    if (s.topic_id != m.topic_id) throw ValidationError("topic ids are not dense and ordered");
    if (s.member_doc_ids.size() != m.member_doc_ids.size()) {
      throw ValidationError(where + ": size does not match its assignments");
    }
    if (m.member_doc_ids.size() < params.min_cluster_size) {
      throw ValidationError(where + ": fewer members than min_cluster_size");
    }
    if (s.word_weights.size() != m.word_weights.size()) {
      throw ValidationError(where + ": stored words do not match the documents");
    }
    for (std::size_t w = 0; w < s.word_weights.size(); ++w) {
      const auto& [term, weight] = s.word_weights[w];
      if (!std::isfinite(weight) || weight < 0.0) throw ValidationError(where + ": invalid weight");
      if (term != m.word_weights[w].first || !close(weight, m.word_weights[w].second)) {
        throw ValidationError(where + ": stored words do not match the documents");
      }
    }
    model.topics[i].word_weights = s.word_weights;
  }
  return model;
}

}  // namespace prospect
