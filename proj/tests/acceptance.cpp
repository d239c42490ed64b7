// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.
#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "ctfidf_oracle.hpp"
#include "json.hpp"
#include "planted.hpp"
#include "prospect/cli.hpp"
#include "prospect/corpus.hpp"
#include "prospect/report.hpp"
#include "prospect/segment.hpp"
#include "prospect/topics.hpp"
#include "support.hpp"

using namespace prospect;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

int failures = 0;

void criterion(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.ok = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (out.ok && secs >= limit_s) {
    out.ok = false;
    out.detail = "too slow";
  }
  if (!out.ok) ++failures;
  char timing[64];
  std::snprintf(timing, sizeof timing, "%.3f s, limit %.0f s", secs, limit_s);
  std::cout << (out.ok ? "PASS" : "FAIL") << " " << id << " " << name << " [" << timing << "]";
  if (!out.detail.empty()) std::cout << ": " << out.detail;
  std::cout << std::endl;
}

int run_cli(std::vector<std::string> args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  if (code != 0) std::cerr << e.str();
  return code;
}

int plant_of(const std::string& text) {
  const auto first = text.substr(0, text.find(' '));
  for (int v = 0; v < 3; ++v) {
    const auto& words = testing::planted_vocabularies()[v];
    if (std::find(words.begin(), words.end(), first) != words.end()) return v;
  }
  return -1;
}

// Majority vocabulary and purity of each topic.
std::vector<std::pair<int, double>> topic_purity(const TopicModel& m) {
  std::vector<std::pair<int, double>> out;
  for (const auto& t : m.topics) {
    std::map<int, std::size_t> votes;
    for (auto id : t.member_doc_ids) ++votes[plant_of(m.documents[id].text)];
    auto best = std::max_element(votes.begin(), votes.end(),
                                 [](const auto& a, const auto& b) { return a.second < b.second; });
    out.emplace_back(best->first, double(best->second) / double(t.member_doc_ids.size()));
  }
  return out;
}

std::string write_planted_corpus(const testing::TempDir& dir, std::size_t n_docs, std::uint64_t seed) {
  auto corpus = testing::planted_corpus((n_docs + 2) / 3, seed);
  corpus.texts.resize(n_docs);
  const auto path = (dir / "corpus.jsonl").string();
  save_normalized(testing::planted_dialogues(corpus.texts), path);
  return path;
}

Outcome worked_example() {
  Outcome o;
  const auto clauses = split_clauses("Find me a comedy to watch right now. I'm super bored.");
  const std::vector<std::string> expected{"Find me a comedy", "to watch right now", "I'm super bored"};
  o.require(clauses == expected, "clause list differs");
  const LexicalEmbedder embedder(64, 42);
  const auto pick = select_odd_candidate(clauses, "movie, play movie, genre comedy", embedder,
                                         StopwordList::english());
  o.require(pick.has_value() && *pick == "I'm super bored",
            "candidate was '" + pick.value_or("<none>") + "'");
  return o;
}

Outcome ctfidf_oracle() {
  Outcome o;
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t vocab = 1 + rng() % 50;
    const std::size_t n_docs = 1 + rng() % 20;
    const std::size_t k = 1 + rng() % std::min<std::size_t>(n_docs, 6);
    std::vector<std::string> docs;
    std::vector<int> labels(n_docs);
    for (std::size_t i = 0; i < n_docs; ++i) {
      std::string d;
      const std::size_t len = 1 + rng() % 15;
      for (std::size_t w = 0; w < len; ++w) d += "t" + std::to_string(rng() % vocab) + " ";
      docs.push_back(d);
      labels[i] = i < k ? static_cast<int>(i) : static_cast<int>(rng() % (k + 1)) - 1;
    }
    const auto got = ctfidf(docs, ClusterAssignment{labels});
    const auto ref = testing::brute_ctfidf(docs, labels);
    o.require(got.weights.size() == ref.size(), "cluster count differs");
    o.require(got.vocabulary.size() == ref.begin()->second.size(), "vocabulary size differs");
    for (const auto& [c, row] : ref) {
      for (const auto& [term, w] : row) {
        const auto idx = got.vocabulary.index(term);
        o.require(idx.has_value(), "term missing: " + term);
        if (!idx) continue;
        const double g = got.weights[static_cast<std::size_t>(c)][*idx];
        const double rel = w == 0.0 ? std::abs(g) : std::abs(g - w) / std::abs(w);
        worst = std::max(worst, rel);
      }
    }
  }
  o.require(worst <= 1e-9, "max relative error " + std::to_string(worst));
  char buf[64];
  std::snprintf(buf, sizeof buf, "max relative error %.3g", worst);
  if (o.ok) o.detail = buf;
  return o;
}

Outcome clustering_recovery() {
  Outcome o;
  const double sigma = 1.0;
  double min_purity = 1.0;
  double max_noise = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    std::mt19937_64 rng(1000 + rep);
    std::normal_distribution<double> g(0.0, sigma);
    // Centres 10 sigma apart along the diagonal.
    const double offset = 10.0 * sigma / std::sqrt(5.0);
    std::vector<float> data;
    std::vector<int> truth;
    for (int blob = 0; blob < 2; ++blob) {
      for (int i = 0; i < 50; ++i) {
        for (int d = 0; d < 5; ++d) data.push_back(static_cast<float>(blob * offset + g(rng)));
        truth.push_back(blob);
      }
    }
    const auto a = cluster_density(EmbeddingMatrix(100, 5, std::move(data)), 10, 5);
    o.require(a.cluster_count() == 2, "repetition " + std::to_string(rep) + ": " +
                                          std::to_string(a.cluster_count()) + " clusters");
    std::size_t match = 0;
    std::map<std::pair<int, int>, std::size_t> table;
    for (std::size_t i = 0; i < 100; ++i) ++table[{a.labels[i], truth[i]}];
    match = std::max(table[{0, 0}] + table[{1, 1}], table[{0, 1}] + table[{1, 0}]);
    const double purity = match / 100.0;
    const double noise = a.noise_count() / 100.0;
    min_purity = std::min(min_purity, purity);
    max_noise = std::max(max_noise, noise);
  }
  o.require(min_purity >= 0.95, "purity " + std::to_string(min_purity));
  o.require(max_noise <= 0.10, "noise " + std::to_string(max_noise));
  char buf[96];
  std::snprintf(buf, sizeof buf, "min purity %.2f, max noise %.2f", min_purity, max_noise);
  if (o.ok) o.detail = buf;
  return o;
}

Outcome merge_semantics() {
  Outcome o;
  auto doc = [](std::size_t i, std::string text) {
    return Document{i, std::move(text), "d", static_cast<int>(i), Speaker::User, Granularity::Utterance};
  };
  std::vector<Document> docs{doc(0, "rain cloud"), doc(1, "rain cloud"), doc(2, "stock market"),
                             doc(3, "rain cloud"), doc(4, "stock bond"), doc(5, "rain cloud")};
  const auto model = assemble_model(docs, EmbeddingMatrix(6, 2), EmbedderConfig{},
                                    ClusterAssignment{{0, 1, 2, 0, 2, 1}}, FitParams{});
  const auto merged = merge_topics(model, 0.915);
  o.require(model.topics.size() == 3 && merged.topics.size() == 2, "duplicate topics did not merge");

  const double t = 0.915;
  const Representer exact = [t](const std::vector<std::vector<std::size_t>>& groups) {
    std::vector<SparseRow> rows;
    for (const auto& g : groups) {
      if (g.size() > 1) rows.push_back({{0, 1.0}});
      else if (g[0] == 0) rows.push_back({{0, 1.0}});
      else rows.push_back({{0, t}, {1, std::sqrt(1 - t * t)}});
    }
    return rows;
  };
  o.require(merge_groups(2, exact, t).group_count == 2, "pair at exactly 0.915 merged");

  // Random models: after merging no recomputed pair exceeds the threshold.
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Document> d;
    std::vector<int> labels;
    const std::size_t k = 2 + rng() % 6;
    for (std::size_t i = 0; i < 24; ++i) {
      std::string text;
      for (int w = 0; w < 4; ++w) text += "w" + std::to_string(rng() % 6) + " ";
      d.push_back(doc(i, text));
      labels.push_back(i < k ? static_cast<int>(i) : static_cast<int>(rng() % k));
    }
    const auto m = merge_topics(assemble_model(d, EmbeddingMatrix(24, 2), EmbedderConfig{},
                                               ClusterAssignment{labels}, FitParams{}),
                                0.915);
    if (m.topics.size() < 2) continue;
    std::vector<std::string> texts;
    for (const auto& x : m.documents) texts.push_back(x.text);
    const auto w = ctfidf(texts, m.assignment);
    for (std::size_t i = 0; i < w.weights.size(); ++i) {
      for (std::size_t j = i + 1; j < w.weights.size(); ++j) {
        const double s = cosine_similarity(std::span<const double>(w.weights[i]),
                                           std::span<const double>(w.weights[j]));
        o.require(s <= t + kMergeTolerance, "post-merge pair at " + std::to_string(s));
      }
    }
  }
  return o;
}

Outcome planted_recovery() {
  Outcome o;
  testing::TempDir dir;
  const auto corpus = write_planted_corpus(dir, 120, 31);
  const auto model_dir = (dir / "model").string();
  o.require(run_cli({"build", "--corpus", corpus, "--mode", "utterances", "--embedder", "lexical",
                     "--out", model_dir}) == 0,
            "build failed");
  if (!o.ok) return o;
  const auto model = import_model(model_dir);
  const auto purity = topic_purity(model);
  std::map<int, int> dominated;
  double min_purity = 1.0;
  for (const auto& [v, p] : purity) {
    ++dominated[v];
    min_purity = std::min(min_purity, p);
  }
  o.require(model.topics.size() == 3, std::to_string(model.topics.size()) + " topics");
  o.require(dominated.size() == 3, "not every vocabulary dominates a topic");
  o.require(min_purity >= 0.9, "purity " + std::to_string(min_purity));

  // For each vocabulary, its most frequent planted word must rank the
  // vocabulary's topic first. Rates over every topic word and every planted
  // word are reported alongside.
  std::string keywords;
  std::vector<std::pair<std::string, int>> planted;
  for (int v = 0; v < 3; ++v) {
    for (const auto& w : testing::planted_vocabularies()[v]) {
      keywords += (keywords.empty() ? "" : ";") + w;
      planted.emplace_back(w, v);
    }
  }
  const auto hits_path = (dir / "hits.json").string();
  o.require(run_cli({"query", "--model", model_dir, "--keywords", keywords, "--top-k", "1", "--out",
                     hits_path}) == 0,
            "query failed");
  if (!o.ok) return o;
  std::ifstream in(hits_path);
  const auto hits = read_hits(in, hits_path);
  auto ranks_first = [&](const std::string& word, int v) {
    const auto it = std::find_if(hits.begin(), hits.end(),
                                 [&](const ProspectHit& h) { return h.keyword == word; });
    return it != hits.end() && purity[static_cast<std::size_t>(it->topic_id)].first == v;
  };
  std::size_t all_ok = 0, topic_words = 0, topic_ok = 0;
  for (const auto& [word, v] : planted) {
    const bool ok = ranks_first(word, v);
    all_ok += ok;
    for (const auto& t : model.topics) {
      for (const auto& [term, w] : t.word_weights) {
        if (term == word) {
          ++topic_words;
          topic_ok += ok;
        }
      }
    }
  }
  for (int v = 0; v < 3; ++v) {
    const auto& head = testing::planted_vocabularies()[v].front();
    o.require(ranks_first(head, v), "keyword '" + head + "' does not rank its topic first");
  }
  char buf[192];
  std::snprintf(buf, sizeof buf,
                "3 topics, min purity %.2f, head words 3/3, topic words %zu/%zu, all planted words %zu/%zu",
                min_purity, topic_ok, topic_words, all_ok, planted.size());
  if (o.ok) o.detail = buf;
  return o;
}

Outcome determinism() {
  Outcome o;
  testing::TempDir dir;
  const auto corpus = write_planted_corpus(dir, 5000, 5);
  for (const char* out : {"run1", "run2"}) {
    o.require(run_cli({"build", "--corpus", corpus, "--dim", "64", "--seed", "42", "--out",
                       (dir / out).string()}) == 0,
              "build failed");
  }
  if (!o.ok) return o;
  for (const char* f : {"embeddings.bin", "assignments.jsonl", "topics.json"}) {
    const auto a = testing::slurp(dir / "run1" / f);
    o.require(!a.empty() && a == testing::slurp(dir / "run2" / f), std::string(f) + " differs");
  }
  return o;
}

Outcome scale() {
  Outcome o;
  testing::TempDir dir;
  const auto corpus = write_planted_corpus(dir, 10000, 6);
  const auto model = (dir / "model").string();
  const auto hits = (dir / "hits.json").string();
  o.require(run_cli({"build", "--corpus", corpus, "--dim", "64", "--out", model}) == 0, "build failed");
  o.require(o.ok && run_cli({"query", "--model", model, "--out", hits}) == 0, "query failed");
  std::string table;
  o.require(o.ok && run_cli({"report", "--hits", hits, "--table", "csv", "--turn-histogram",
                             (dir / "hist.csv").string()},
                            &table) == 0,
            "report failed");
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  const double peak_mb = usage.ru_maxrss / 1024.0;
  o.require(peak_mb < 2048.0, "peak memory " + std::to_string(peak_mb) + " MB");
  char buf[64];
  std::snprintf(buf, sizeof buf, "peak RSS %.0f MB", peak_mb);
  if (o.ok) o.detail = buf;
  return o;
}

Outcome reporting() {
  Outcome o;
  ProspectHit hit;
  hit.keyword = "sport and leisure";
  hit.topic_id = 0;
  const std::vector<int> turns{0, 0, 0, 1, 1, 4, 9};
  const std::vector<std::string> texts{"plain", "with, comma", "with \"quote\"", "multi\nline",
                                       "pipe | bar", "café ☕", "  padded  "};
  for (std::size_t i = 0; i < turns.size(); ++i) {
    hit.sequences.push_back({texts[i], "dlg_" + std::to_string(i), turns[i], Speaker::User});
  }
  const std::vector<ProspectHit> hits{hit};
  const std::map<int, std::size_t> expected{{0, 3}, {1, 2}, {4, 1}, {9, 1}};
  o.require(turn_distribution(hits) == expected, "distribution differs");
  const auto rows = parse_csv(render_table(hits, TableFormat::Csv));
  o.require(rows.size() == 8, "row count");
  for (std::size_t i = 0; o.ok && i < turns.size(); ++i) {
    const std::vector<std::string> want{hit.keyword, "0", texts[i], std::to_string(turns[i]), "USER"};
    o.require(rows[i + 1] == want, "row " + std::to_string(i) + " did not round-trip");
  }
  return o;
}

Outcome format_conformance() {
  Outcome o;
  std::ostringstream sgd, woz;
  const auto a = load_sgd(testing::data_dir() / "sgd");
  const auto b = load_multiwoz(testing::data_dir() / "multiwoz");
  o.require(a.size() == 3 && b.size() == 3, "fixture dialogue count");
  write_normalized(a, sgd);
  write_normalized(b, woz);
  o.require(sgd.str() == testing::slurp(testing::data_dir() / "golden" / "sgd.jsonl"), "SGD golden differs");
  o.require(woz.str() == testing::slurp(testing::data_dir() / "golden" / "multiwoz.jsonl"),
            "MultiWOZ golden differs");
  return o;
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  criterion(1, "worked-example fidelity", 1, worked_example);
  criterion(2, "c-TF-IDF oracle equivalence", 5, ctfidf_oracle);
  criterion(3, "clustering recovery", 10, clustering_recovery);
  criterion(4, "merge semantics", 1, merge_semantics);
  criterion(5, "end-to-end planted recovery", 30, planted_recovery);
  criterion(6, "determinism at 5,000 documents", 60, determinism);
  criterion(7, "scale sanity at 10,000 documents", 300, scale);
  criterion(8, "reporting", 1, reporting);
  criterion(9, "format conformance", 1, format_conformance);
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
