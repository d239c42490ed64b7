#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prospect/corpus.hpp"
#include "prospect/embed.hpp"

namespace prospect {

/// A set of lowercase, whitespace-free words read from a line-per-entry list
/// ('#' starts a comment line).
class WordSet {
 public:
  WordSet() = default;
  explicit WordSet(std::set<std::string, std::less<>> words);

  static WordSet parse(std::string_view data);
  static WordSet load(const std::filesystem::path& path);

  bool contains(std::string_view word) const { return words_.find(word) != words_.end(); }
  std::size_t size() const { return words_.size(); }

 private:
  std::set<std::string, std::less<>> words_;
};

class StopwordList : public WordSet {
 public:
  using WordSet::WordSet;
  StopwordList(WordSet words) : WordSet(std::move(words)) {}
  /// The bundled English list.
  static const StopwordList& english();
};

class VerbLexicon : public WordSet {
 public:
  using WordSet::WordSet;
  VerbLexicon(WordSet words) : WordSet(std::move(words)) {}
  /// The bundled common-verb lemma list.
  static const VerbLexicon& common();
};

/// Rule-based clause splitter.
///
/// Rules, in order:
///  1. sentences end at tokens ending in '.', '!' or '?';
///  2. a clause opens before a conjunction with at least two tokens after it;
///  3. a clause opens before "to" when the next token is a known verb;
///  4. a clause opens after a comma when a pronoun starts a segment of at
///     least two tokens.
/// Clause edges lose their boundary punctuation; tokens are otherwise kept.
class ClauseSplitter {
 public:
  ClauseSplitter() : verbs_(&VerbLexicon::common()) {}
  explicit ClauseSplitter(const VerbLexicon& verbs) : verbs_(&verbs) {}

  std::vector<std::string> split(std::string_view utterance) const;

 private:
  const VerbLexicon* verbs_;
};

std::vector<std::string> split_clauses(std::string_view utterance);

/// Lowercased, edge-punctuation-stripped tokens of `text` minus stopwords.
std::set<std::string> content_tokens(std::string_view text, const StopwordList& stopwords);

bool has_task_overlap(std::string_view clause, std::string_view annotation,
                      const StopwordList& stopwords);

/// The clause of one utterance least similar to its annotation string, if any.
///
/// Nothing is returned for single-clause utterances or when every clause
/// overlaps the annotation. Clauses with no content token are skipped.
/// Ties go to the earliest clause; with an empty annotation every survivor
/// scores 0.
std::optional<std::string> select_odd_candidate(std::span<const std::string> clauses,
                                                std::string_view annotation,
                                                const Embedder& embedder,
                                                const StopwordList& stopwords);

enum class Granularity { Utterance, Clause };
enum class DocumentMode { Utterances, FilteredClauses };

std::string_view to_string(Granularity g);
Granularity parse_granularity(std::string_view name);
std::string_view to_string(DocumentMode mode);
DocumentMode parse_document_mode(std::string_view name);

struct Document {
  std::size_t doc_id = 0;
  std::string text;
  std::string dialogue_id;
  int turn_index = 0;
  Speaker speaker = Speaker::User;
  Granularity granularity = Granularity::Utterance;

  bool operator==(const Document&) const = default;
};

/// Turns a corpus into topic-model documents, in corpus order with dense ids.
std::vector<Document> build_documents(const Corpus& corpus, DocumentMode mode,
                                      const Embedder& embedder, const StopwordList& stopwords,
                                      const ClauseSplitter& splitter = {});

void write_documents(std::span<const Document> docs, std::ostream& out);
/// Reads documents JSON-lines; `source` names the input in error messages.
std::vector<Document> read_documents(std::istream& in, const std::string& source);

}  // namespace prospect
