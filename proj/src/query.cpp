#include "prospect/query.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "prospect/error.hpp"
#include "prospect/text.hpp"

namespace prospect {

KeywordSet::KeywordSet(std::vector<std::string> keywords) {
  std::set<std::string> seen;
  for (auto& k : keywords) {
    std::string trimmed(text::trim(k));
    if (trimmed.empty()) throw ContractError("keyword set contains an empty keyword");
    if (!seen.insert(trimmed).second) throw ContractError("duplicate keyword '" + trimmed + "'");
    keywords_.push_back(std::move(trimmed));
  }
  if (keywords_.empty()) throw ContractError("keyword set is empty");
}

KeywordSet KeywordSet::defaults() {
  return KeywordSet({"personal relationships", "personal experiences",
                     "emotional experiences and feelings", "sport and leisure", "work and school"});
}

KeywordSet KeywordSet::parse(std::string_view semicolon_list) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= semicolon_list.size()) {
    auto end = semicolon_list.find(';', pos);
    if (end == std::string_view::npos) end = semicolon_list.size();
    const auto piece = text::trim(semicolon_list.substr(pos, end - pos));
    if (!piece.empty()) out.emplace_back(piece);
    pos = end + 1;
  }
  return KeywordSet(std::move(out));
}

std::vector<double> topic_embedding(const Topic& topic, const Embedder& embedder) {
  if (topic.word_weights.empty()) {
    throw ContractError("topic " + std::to_string(topic.topic_id) + " has no top words");
  }
  std::vector<std::string> words;
  for (std::size_t i = 0; i < std::min<std::size_t>(10, topic.word_weights.size()); ++i) {
    words.push_back(topic.word_weights[i].first);
  }
  const auto m = embedder.embed(words);
  if (m.rows() != words.size()) throw ProtocolError("embedder returned the wrong row count");
  std::vector<double> mean(m.dim(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    for (std::size_t j = 0; j < m.dim(); ++j) mean[j] += row[j];
  }
  for (auto& v : mean) v /= static_cast<double>(m.rows());
  return mean;
}

std::vector<Sequence> collect_sequences(const TopicModel& model, int topic_id) {
  const auto& topic = model.topic(topic_id);
  std::vector<Sequence> out;
  out.reserve(topic.member_doc_ids.size());
  for (auto id : topic.member_doc_ids) {
    if (id >= model.documents.size()) throw LookupError("unknown doc_id " + std::to_string(id));
    const auto& d = model.documents[id];
    out.push_back({d.text, d.dialogue_id, d.turn_index, d.speaker});
  }
  std::stable_sort(out.begin(), out.end(), [](const Sequence& a, const Sequence& b) {
    if (a.dialogue_id != b.dialogue_id) return a.dialogue_id < b.dialogue_id;
    return a.turn_index < b.turn_index;
  });
  return out;
}

std::vector<ProspectHit> query(const TopicModel& model, const KeywordSet& keywords,
                               const Embedder& embedder, std::size_t top_k) {
  if (model.topics.empty()) throw ContractError("model has no topics");
  if (top_k == 0) throw ContractError("top_k must be at least 1");

  std::vector<std::vector<double>> topic_vectors;
  topic_vectors.reserve(model.topics.size());
  for (const auto& t : model.topics) topic_vectors.push_back(topic_embedding(t, embedder));

  std::vector<std::string> phrases(keywords.keywords().begin(), keywords.keywords().end());
  const auto keyword_vectors = embedder.embed(phrases);
  if (keyword_vectors.rows() != phrases.size()) {
    throw ProtocolError("embedder returned the wrong row count");
  }

  std::vector<ProspectHit> hits;
  const std::size_t take = std::min(top_k, model.topics.size());
  for (std::size_t k = 0; k < phrases.size(); ++k) {
    const auto kv = keyword_vectors.row(k);
    const std::vector<double> key(kv.begin(), kv.end());
    std::vector<double> scores(model.topics.size());
    for (std::size_t t = 0; t < model.topics.size(); ++t) {
      scores[t] = cosine_similarity(std::span<const double>(key), topic_vectors[t]);
    }
    std::vector<std::size_t> order(model.topics.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return model.topics[a].topic_id < model.topics[b].topic_id;
    });
    for (std::size_t r = 0; r < take; ++r) {
      const auto& topic = model.topics[order[r]];
      ProspectHit hit;
      hit.keyword = phrases[k];
      hit.topic_id = topic.topic_id;
      hit.score = scores[order[r]];
      for (const auto& [w, _] : topic.word_weights) hit.topic_words.push_back(w);
      hit.sequences = collect_sequences(model, topic.topic_id);
      hits.push_back(std::move(hit));
    }
  }
  return hits;
}

}  // namespace prospect
