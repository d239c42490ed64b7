#include <random>

#include "ctfidf_oracle.hpp"
#include "doctest.h"
#include "prospect/error.hpp"
#include "prospect/topics.hpp"

using namespace prospect;

namespace {

double weight_of(const CtfidfResult& r, int c, const std::string& term) {
  const auto idx = r.vocabulary.index(term);
  REQUIRE(idx.has_value());
  return r.weights[static_cast<std::size_t>(c)][*idx];
}

}  // namespace

TEST_CASE("hand-evaluated weight") {
  const std::vector<std::string> docs{"book a table book", "feeling sick today"};
  const auto r = ctfidf(docs, ClusterAssignment{{0, 1}});
  // A = 7 / 2 = 3.5, f(book) = 2, so W = 2 ln(1 + 1.75) = 2 ln(2.75).
  CHECK(std::abs(weight_of(r, 0, "book") - 2 * std::log(2.75)) <= 1e-12);
  CHECK(std::abs(weight_of(r, 0, "book") - 2.0232) <= 1e-4);
  CHECK(std::abs(weight_of(r, 1, "sick") - std::log(1 + 3.5)) <= 1e-12);
  CHECK(weight_of(r, 1, "book") == 0.0);
  CHECK(r.vocabulary.size() == 6);
}

TEST_CASE("single cluster weights are strictly positive") {
  const std::vector<std::string> docs{"a b c", "c d", "skip me"};
  const auto r = ctfidf(docs, ClusterAssignment{{0, 0, -1}});
  REQUIRE(r.weights.size() == 1);
  CHECK(r.vocabulary.size() == 4);
  for (double w : r.weights[0]) CHECK(w > 0.0);
  CHECK_FALSE(r.vocabulary.index("skip").has_value());
}

TEST_CASE("vectorizer keeps stopwords and drops long tokens") {
  const std::string long_token(41, 'x');
  const auto toks = vectorizer_tokens("My friend, AND we " + long_token + " " + std::string(40, 'y'));
  const std::vector<std::string> expected{"my", "friend", "and", "we", std::string(40, 'y')};
  CHECK(toks == expected);
}

TEST_CASE("matches the brute-force oracle on random corpora") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t vocab = 1 + rng() % 50;
    const std::size_t n_docs = 1 + rng() % 20;
    const std::size_t k = 1 + rng() % std::min<std::size_t>(n_docs, 5);
    std::vector<std::string> docs;
    std::vector<int> labels(n_docs, -1);
    for (std::size_t i = 0; i < n_docs; ++i) {
      std::string d;
      const std::size_t len = 1 + rng() % 12;
      for (std::size_t w = 0; w < len; ++w) d += "w" + std::to_string(rng() % vocab) + " ";
      docs.push_back(d);
      labels[i] = i < k ? static_cast<int>(i) : static_cast<int>(rng() % (k + 1)) - 1;
    }
    const auto r = ctfidf(docs, ClusterAssignment{labels});
    const auto ref = testing::brute_ctfidf(docs, labels);
    REQUIRE(r.weights.size() == k);
    REQUIRE(r.vocabulary.size() == ref.begin()->second.size());
    for (const auto& [c, row] : ref) {
      for (const auto& [term, w] : row) {
        const double got = weight_of(r, c, term);
        CHECK(std::isfinite(got));
        CHECK(got >= 0.0);
        if (w == 0.0) {
          CHECK(got == 0.0);
        } else {
          CHECK(std::abs(got - w) <= 1e-9 * std::abs(w));
        }
      }
    }
  }
}

TEST_CASE("log base only rescales weights") {
  const std::vector<std::string> docs{"x y y z", "y z z z w", "q x"};
  const auto r = ctfidf(docs, ClusterAssignment{{0, 1, 2}});
  const auto ref = testing::brute_ctfidf(docs, {0, 1, 2});
  for (int c = 0; c < 3; ++c) {
    std::vector<WordWeight> base2;
    for (const auto& [t, w] : ref.at(c)) base2.emplace_back(t, w / std::log(2.0));
    const auto top = top_words(r.weights[c], r.vocabulary, 10);
    std::sort(base2.begin(), base2.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    for (std::size_t i = 0; i < top.size(); ++i) CHECK(top[i].first == base2[i].first);
  }
}

TEST_CASE("top_words") {
  const Vocabulary v({"d", "c", "b", "a", "e"});
  CHECK(v.term(0) == "a");
  CHECK(v.index("e") == 4u);
  SUBCASE("up to k positive terms") {
    const std::vector<double> w{1, 2, 0, 3, 4};
    const auto top = top_words(w, v, 10);
    REQUIRE(top.size() == 4);
    CHECK(top[0] == WordWeight{"e", 4});
    CHECK(top[3] == WordWeight{"a", 1});
  }
  SUBCASE("ties are lexicographic") {
    const std::vector<double> w{2, 2, 1, 0, 0};
    const auto top = top_words(w, v, 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].first == "a");
    CHECK(top[1].first == "b");
  }
  SUBCASE("contracts") {
    CHECK_THROWS_AS(top_words(std::vector<double>{1, 2}, v, 3), ContractError);
    CHECK_THROWS_AS(top_words(std::vector<double>{1, 2, 3, 4, 5}, v, 0), ContractError);
  }
}

TEST_CASE("c-TF-IDF errors") {
  const std::vector<std::string> docs{"a", "b"};
  CHECK_THROWS_AS(ctfidf(docs, ClusterAssignment{{-1, -1}}), ContractError);
  CHECK_THROWS_AS(ctfidf(docs, ClusterAssignment{{0}}), ContractError);
  const std::vector<std::string> empty{"?!", "..."};
  CHECK_THROWS_AS(ctfidf(empty, ClusterAssignment{{0, 0}}), ContractError);
}
