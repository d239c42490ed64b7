#include "prospect/segment.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <sstream>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "prospect/error.hpp"
#include "prospect/text.hpp"

namespace prospect {

namespace detail {
extern const std::string_view kStopwordsData;
extern const std::string_view kVerbsData;
}  // namespace detail

using ojson = nlohmann::ordered_json;

WordSet::WordSet(std::set<std::string, std::less<>> words) : words_(std::move(words)) {
  for (const auto& w : words_) {
    if (w.empty() || text::to_lower(w) != w || text::split_whitespace(w).size() != 1) {
      throw ContractError("word list entry '" + w + "' must be lowercase without whitespace");
    }
  }
}

WordSet WordSet::parse(std::string_view data) {
  std::set<std::string, std::less<>> words;
  std::size_t pos = 0;
  while (pos <= data.size()) {
    auto nl = data.find('\n', pos);
    if (nl == std::string_view::npos) nl = data.size();
    const auto line = text::trim(data.substr(pos, nl - pos));
    if (!line.empty() && line.front() != '#') words.emplace(line);
    pos = nl + 1;
  }
  return WordSet(std::move(words));
}

WordSet WordSet::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open word list '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const StopwordList& StopwordList::english() {
  static const StopwordList list(WordSet::parse(detail::kStopwordsData));
  return list;
}

const VerbLexicon& VerbLexicon::common() {
  static const VerbLexicon lexicon(WordSet::parse(detail::kVerbsData));
  return lexicon;
}

namespace {

constexpr std::array kConjunctions = {"and",  "but",  "or",    "so",    "because", "since",
                                      "although", "while", "when", "if", "that",  "which",
                                      "who",  "where", "after", "before"};

constexpr std::array kPronouns = {
    "i",       "you",     "he",      "she",     "it",     "we",      "they",    "me",
    "him",     "her",     "us",      "them",    "my",     "your",    "his",     "its",
    "our",     "their",   "i'm",     "i've",    "i'll",   "i'd",     "you're",  "you've",
    "you'll",  "you'd",   "he's",    "he'll",   "he'd",   "she's",   "she'll",  "she'd",
    "it's",    "it'll",   "we're",   "we've",   "we'll",  "we'd",    "they're", "they've",
    "they'll", "they'd"};

template <std::size_t N>
bool in_list(const std::array<const char*, N>& list, std::string_view w) {
  return std::any_of(list.begin(), list.end(), [&](const char* s) { return w == s; });
}

// Lowercased, edge-stripped form with typographic apostrophes folded to '.
std::string normalize_word(std::string_view token) {
  std::string w = text::to_lower(text::strip_edge_punctuation(token));
  std::string out;
  out.reserve(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i + 2 < w.size() && static_cast<unsigned char>(w[i]) == 0xE2 &&
        static_cast<unsigned char>(w[i + 1]) == 0x80 &&
        (static_cast<unsigned char>(w[i + 2]) == 0x98 ||
         static_cast<unsigned char>(w[i + 2]) == 0x99)) {
      out.push_back('\'');
      i += 2;
    } else {
      out.push_back(w[i]);
    }
  }
  return out;
}

bool is_boundary_punct(char c) {
  return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?';
}

bool ends_sentence(std::string_view token) {
  std::size_t e = token.size();
  while (e > 0) {
    const char c = token[e - 1];
    if (c == '"' || c == '\'' || c == ')' || c == ']') {
      --e;
      continue;
    }
    break;
  }
  if (e == 0) return false;
  const char last = token[e - 1];
  if (last == '.' || last == '!' || last == '?') return true;
  // U+2026 horizontal ellipsis
  return e >= 3 && token.substr(e - 3, 3) == "\xE2\x80\xA6";
}

bool ends_with_comma(std::string_view token) { return !token.empty() && token.back() == ','; }

// Strips boundary punctuation (and a trailing ellipsis) from the clause edges.
std::string clean_clause(std::span<const std::string_view> tokens) {
  std::string joined;
  for (auto t : tokens) {
    if (!joined.empty()) joined.push_back(' ');
    joined.append(t);
  }
  std::string_view v = joined;
  bool changed = true;
  while (changed && !v.empty()) {
    changed = false;
    while (!v.empty() && (is_boundary_punct(v.back()) || v.back() == ' ')) {
      v.remove_suffix(1);
      changed = true;
    }
    if (v.size() >= 3 && v.substr(v.size() - 3) == "\xE2\x80\xA6") {
      v.remove_suffix(3);
      changed = true;
    }
  }
  while (!v.empty() && (is_boundary_punct(v.front()) || v.front() == ' ')) v.remove_prefix(1);
  return std::string(v);
}

}  // namespace

std::vector<std::string> ClauseSplitter::split(std::string_view utterance) const {
  const auto tokens = text::split_whitespace(utterance);
  std::vector<std::string> clauses;

  std::size_t start = 0;
  while (start < tokens.size()) {
    std::size_t end = start;
    while (end < tokens.size() && !ends_sentence(tokens[end])) ++end;
    if (end < tokens.size()) ++end;  // include the terminator token
    const std::span<const std::string_view> sentence(tokens.data() + start, end - start);
    start = end;

    std::vector<std::string> words(sentence.size());
    for (std::size_t i = 0; i < sentence.size(); ++i) words[i] = normalize_word(sentence[i]);
    // words_after[i] = word tokens strictly after position i
    std::vector<std::size_t> words_after(sentence.size() + 1, 0);
    for (std::size_t i = sentence.size(); i-- > 0;) {
      words_after[i] = words_after[i + 1] + (i + 1 < sentence.size() && !words[i + 1].empty());
    }

    std::vector<std::size_t> cuts;
    std::size_t last_cut = 0;
    for (std::size_t i = 1; i < sentence.size(); ++i) {
      const auto& w = words[i];
      if (w.empty()) continue;
      bool cut = false;
      if (in_list(kConjunctions, w) && words_after[i] >= 2) cut = true;
      if (!cut && w == "to" && i + 1 < sentence.size() && verbs_->contains(words[i + 1])) cut = true;
      if (!cut && ends_with_comma(sentence[i - 1]) && in_list(kPronouns, w) &&
          words_after[i] + 1 >= 2) {
        cut = true;
      }
      if (!cut) continue;
      // Do not leave a clause made only of trigger words ("and so ...").
      bool only_triggers = true;
      for (std::size_t j = last_cut; j < i; ++j) {
        if (!words[j].empty() && !in_list(kConjunctions, words[j]) && words[j] != "to") {
          only_triggers = false;
          break;
        }
      }
      if (only_triggers) continue;
      cuts.push_back(i);
      last_cut = i;
    }
    cuts.push_back(sentence.size());

    std::size_t from = 0;
    for (auto to : cuts) {
      auto clause = clean_clause(sentence.subspan(from, to - from));
      if (!clause.empty()) clauses.push_back(std::move(clause));
      from = to;
    }
  }
  return clauses;
}

std::vector<std::string> split_clauses(std::string_view utterance) {
  static const ClauseSplitter splitter;
  return splitter.split(utterance);
}

std::set<std::string> content_tokens(std::string_view text, const StopwordList& stopwords) {
  std::set<std::string> out;
  for (auto piece : text::split_whitespace(text)) {
    auto w = normalize_word(piece);
    if (!w.empty() && !stopwords.contains(w)) out.insert(std::move(w));
  }
  return out;
}

bool has_task_overlap(std::string_view clause, std::string_view annotation,
                      const StopwordList& stopwords) {
  if (text::trim(annotation).empty()) return false;
  const auto a = content_tokens(clause, stopwords);
  const auto b = content_tokens(annotation, stopwords);
  return std::any_of(a.begin(), a.end(), [&](const std::string& t) { return b.count(t) > 0; });
}

namespace {

// Clauses eligible for similarity ranking, or empty when the utterance has a
// single clause.
std::vector<std::size_t> surviving_clauses(std::span<const std::string> clauses,
                                           std::string_view annotation,
                                           const StopwordList& stopwords) {
  std::vector<std::size_t> out;
  if (clauses.size() <= 1) return out;
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    if (has_task_overlap(clauses[i], annotation, stopwords)) continue;
    if (content_tokens(clauses[i], stopwords).empty()) {
      spdlog::debug("skipping clause without content tokens: '{}'", clauses[i]);
      continue;
    }
    out.push_back(i);
  }
  return out;
}

std::size_t argmin_similarity(std::span<const std::size_t> survivors,
                              const std::vector<std::span<const float>>& clause_vectors,
                              std::span<const float> annotation_vector) {
  std::size_t best = survivors.front();
  double best_sim = cosine_similarity(clause_vectors.front(), annotation_vector);
  for (std::size_t k = 1; k < survivors.size(); ++k) {
    const double sim = cosine_similarity(clause_vectors[k], annotation_vector);
    if (sim < best_sim) {
      best_sim = sim;
      best = survivors[k];
    }
  }
  return best;
}

}  // namespace

std::optional<std::string> select_odd_candidate(std::span<const std::string> clauses,
                                                std::string_view annotation,
                                                const Embedder& embedder,
                                                const StopwordList& stopwords) {
  const auto survivors = surviving_clauses(clauses, annotation, stopwords);
  if (survivors.empty()) return std::nullopt;
  if (text::trim(annotation).empty()) return clauses[survivors.front()];

  std::vector<std::string> texts;
  for (auto i : survivors) texts.push_back(clauses[i]);
  texts.emplace_back(annotation);
  const auto m = embedder.embed(texts);
  if (m.rows() != texts.size()) throw ProtocolError("embedder returned the wrong row count");
  std::vector<std::span<const float>> vectors;
  for (std::size_t k = 0; k < survivors.size(); ++k) vectors.push_back(m.row(k));
  return clauses[argmin_similarity(survivors, vectors, m.row(survivors.size()))];
}

std::string_view to_string(Granularity g) {
  return g == Granularity::Utterance ? "UTTERANCE" : "CLAUSE";
}

Granularity parse_granularity(std::string_view name) {
  if (name == "UTTERANCE") return Granularity::Utterance;
  if (name == "CLAUSE") return Granularity::Clause;
  throw SchemaError("unknown granularity '" + std::string(name) + "'");
}

std::string_view to_string(DocumentMode mode) {
  return mode == DocumentMode::Utterances ? "utterances" : "filtered-clauses";
}

DocumentMode parse_document_mode(std::string_view name) {
  if (name == "utterances") return DocumentMode::Utterances;
  if (name == "filtered-clauses") return DocumentMode::FilteredClauses;
  throw ContractError("unknown mode '" + std::string(name) + "'");
}

std::vector<Document> build_documents(const Corpus& corpus, DocumentMode mode,
                                      const Embedder& embedder, const StopwordList& stopwords,
                                      const ClauseSplitter& splitter) {
  if (corpus.empty()) throw ContractError("empty corpus");
  std::vector<Document> docs;

  if (mode == DocumentMode::Utterances) {
    for (const auto& d : corpus.dialogues()) {
      for (const auto& t : d.turns) {
        docs.push_back({docs.size(), t.text, d.dialogue_id, t.turn_index, t.speaker,
                        Granularity::Utterance});
      }
    }
    return docs;
  }

  // Filtered clauses: collect every ranking problem first so the embedder sees
  // one batch of unique texts, then pick per turn in corpus order.
  struct Pending {
    const Dialogue* dialogue;
    const Turn* turn;
    std::vector<std::string> clauses;
    std::vector<std::size_t> survivors;
    std::string annotation;
  };
  std::vector<Pending> pending;
  std::map<std::string, std::size_t, std::less<>> text_row;
  std::vector<std::string> unique_texts;
  auto intern = [&](const std::string& s) {
    if (text_row.emplace(s, unique_texts.size()).second) unique_texts.push_back(s);
  };

  std::size_t skipped_single = 0;
  for (const auto& d : corpus.dialogues()) {
    for (const auto& t : d.turns) {
      Pending p{&d, &t, splitter.split(t.text), {}, annotation_text(t)};
      if (p.clauses.size() <= 1) {
        ++skipped_single;
        continue;
      }
      p.survivors = surviving_clauses(p.clauses, p.annotation, stopwords);
      if (p.survivors.empty()) continue;
      if (!text::trim(p.annotation).empty()) {
        for (auto i : p.survivors) intern(p.clauses[i]);
        intern(p.annotation);
      }
      pending.push_back(std::move(p));
    }
  }
  spdlog::debug("{} single-clause turns treated as task-related", skipped_single);

  EmbeddingMatrix m;
  if (!unique_texts.empty()) {
    m = embedder.embed(unique_texts);
    if (m.rows() != unique_texts.size()) {
      throw ProtocolError("embedder returned the wrong row count");
    }
  }
  auto row_of = [&](const std::string& s) { return m.row(text_row.find(s)->second); };

  for (const auto& p : pending) {
    std::size_t chosen = p.survivors.front();
    if (!text::trim(p.annotation).empty()) {
      std::vector<std::span<const float>> vectors;
      for (auto i : p.survivors) vectors.push_back(row_of(p.clauses[i]));
      chosen = argmin_similarity(p.survivors, vectors, row_of(p.annotation));
    }
    docs.push_back({docs.size(), p.clauses[chosen], p.dialogue->dialogue_id, p.turn->turn_index,
                    p.turn->speaker, Granularity::Clause});
  }
  return docs;
}

void write_documents(std::span<const Document> docs, std::ostream& out) {
  for (const auto& d : docs) {
    ojson obj;
    obj["doc_id"] = d.doc_id;
    obj["text"] = d.text;
    obj["dialogue_id"] = d.dialogue_id;
    obj["turn_index"] = d.turn_index;
    obj["speaker"] = to_string(d.speaker);
    obj["granularity"] = to_string(d.granularity);
    out << obj.dump() << '\n';
  }
}

std::vector<Document> read_documents(std::istream& in, const std::string& source) {
  std::vector<Document> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const std::string where = source + ": line " + std::to_string(lineno);
    ojson obj;
    try {
      obj = ojson::parse(line);
    } catch (const ojson::parse_error& e) {
      throw ParseError(where + ": byte " + std::to_string(e.byte) + ": " + e.what());
    }
    try {
      Document d;
      d.doc_id = obj.at("doc_id").get<std::size_t>();
      d.text = obj.at("text").get<std::string>();
      d.dialogue_id = obj.at("dialogue_id").get<std::string>();
      d.turn_index = obj.at("turn_index").get<int>();
      d.speaker = parse_speaker(obj.at("speaker").get<std::string>());
      d.granularity = parse_granularity(obj.at("granularity").get<std::string>());
      docs.push_back(std::move(d));
    } catch (const ojson::exception& e) {
      throw SchemaError(where + ": " + e.what());
    } catch (const SchemaError& e) {
      throw SchemaError(where + ": " + e.what());
    }
  }
  return docs;
}

}  // namespace prospect
