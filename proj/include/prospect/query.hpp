#pragma once

#include <span>
#include <string>
#include <vector>

#include "prospect/embed.hpp"
#include "prospect/topics.hpp"

namespace prospect {

/// Ordered, non-empty list of unique (trimmed) keyword phrases.
class KeywordSet {
 public:
  explicit KeywordSet(std::vector<std::string> keywords);

  /// The five chit-chat reference phrases used by default.
  static KeywordSet defaults();
  /// Splits "k1;k2;..." and trims each entry; empty entries are dropped.
  static KeywordSet parse(std::string_view semicolon_list);

  std::span<const std::string> keywords() const { return keywords_; }

 private:
  std::vector<std::string> keywords_;
};

struct Sequence {
  std::string text;
  std::string dialogue_id;
  int turn_index = 0;
  Speaker speaker = Speaker::User;

  bool operator==(const Sequence&) const = default;
};

struct ProspectHit {
  std::string keyword;
  int topic_id = 0;
  double score = 0.0;
  std::vector<std::string> topic_words;
  std::vector<Sequence> sequences;

  bool operator==(const ProspectHit&) const = default;
};

/// Mean of the embeddings of the topic's top words (at most 10), each word
/// embedded on its own. Not re-normalized.
std::vector<double> topic_embedding(const Topic& topic, const Embedder& embedder);

/// For each keyword (embedded as a whole phrase), the min(top_k, K) topics
/// with the highest cosine similarity, score descending, ties to the lower
/// topic id. Keywords keep their order; topics may repeat across keywords.
std::vector<ProspectHit> query(const TopicModel& model, const KeywordSet& keywords,
                               const Embedder& embedder, std::size_t top_k = 5);

/// Member documents of a topic ordered by (dialogue_id, turn_index).
std::vector<Sequence> collect_sequences(const TopicModel& model, int topic_id);

}  // namespace prospect
