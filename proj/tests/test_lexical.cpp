#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "juris/io.hpp"
#include "juris/lexical.hpp"
#include "juris/rng.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace juris;

namespace {

Document doc(std::string id, std::string text) {
  Document d;
  d.id = std::move(id);
  d.text = std::move(text);
  return d;
}

}  // namespace

TEST_CASE("tokenize: word mode") {
  TokenizerConfig cfg;
  CHECK(tokenize("The Theft", cfg) == std::vector<std::string>{"the", "theft"});
  CHECK(tokenize("", cfg).empty());
  CHECK(tokenize("a,b;;c", cfg) == std::vector<std::string>{"a", "b", "c"});
  cfg.lowercase = false;
  CHECK(tokenize("The Theft", cfg) == std::vector<std::string>{"The", "Theft"});
}

TEST_CASE("tokenize: cjk bigram hybrid") {
  TokenizerConfig cfg{TokenizerMode::kCjkBigramHybrid, true};
  CHECK(tokenize("盗窃罪", cfg) == std::vector<std::string>{"盗窃", "窃罪"});
  CHECK(tokenize("盗", cfg) == std::vector<std::string>{"盗"});
  CHECK(tokenize("theft案件x", cfg) == std::vector<std::string>{"theft", "案件", "x"});
  CHECK(tokenize("盗窃，罪", cfg) == std::vector<std::string>{"盗窃", "罪"});
}

TEST_CASE("build_index invariants") {
  TokenizerConfig cfg;
  auto index = build_index({doc("d2", "a b c"), doc("d1", "a a b")}, cfg);
  CHECK(index.num_docs() == 2);
  CHECK(index.avg_doc_length() == doctest::Approx(3.0));
  const auto& plist = index.postings().at("a");
  REQUIRE(plist.size() == 2);
  CHECK(plist[0].doc_id == "d1");  // sorted by id
  CHECK(plist[0].tf == 2);
  CHECK(plist[1].doc_id == "d2");

  SUBCASE("empty corpus is an error") {
    CHECK_THROWS_AS(build_index({}, cfg), DataError);
  }
  SUBCASE("empty text contributes zero length") {
    auto ix = build_index({doc("d1", ""), doc("d2", "a b")}, cfg);
    CHECK(ix.doc_lengths().at("d1") == 0);
    CHECK(ix.avg_doc_length() == doctest::Approx(1.0));
  }
}

TEST_CASE("index build is order independent") {
  TokenizerConfig cfg;
  std::vector<Document> docs = {doc("d1", "a a b"), doc("d2", "b c"), doc("d3", "c c d a")};
  auto forward = build_index(docs, cfg);
  std::reverse(docs.begin(), docs.end());
  auto backward = build_index(docs, cfg);
  CHECK(forward == backward);
  CHECK(forward.to_json_string() == backward.to_json_string());
}

TEST_CASE("bm25 hand check: N=2, single term, dl=avgdl gives ln 2") {
  TokenizerConfig cfg;
  auto index = build_index({doc("d1", "alpha beta"), doc("d2", "gamma delta")}, cfg);
  const double score = bm25_score(index, {"alpha"}, "d1");
  CHECK(score == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  CHECK(bm25_score(index, {"alpha"}, "d2") == 0.0);  // absent term
  CHECK(bm25_score(index, {}, "d1") == 0.0);         // empty query
  CHECK_THROWS_AS(bm25_score(index, {"alpha"}, "nope"), DataError);
}

TEST_CASE("bm25 monotone in tf, antitone in dl") {
  TokenizerConfig cfg;
  // d_tf1/d_tf2 differ only in term frequency; padding keeps lengths equal.
  auto index = build_index({doc("a", "term pad pad pad"), doc("b", "term term pad pad"),
                            doc("c", "term pad pad pad pad pad pad pad")},
                           cfg);
  CHECK(bm25_score(index, {"term"}, "b") > bm25_score(index, {"term"}, "a"));
  CHECK(bm25_score(index, {"term"}, "a") > bm25_score(index, {"term"}, "c"));
}

TEST_CASE("bm25 query terms are deduplicated") {
  TokenizerConfig cfg;
  auto index = build_index({doc("d1", "x y"), doc("d2", "z w")}, cfg);
  CHECK(bm25_score(index, {"x", "x", "x"}, "d1") ==
        doctest::Approx(bm25_score(index, {"x"}, "d1")));
}

TEST_CASE("bm25 matches the brute-force closed form on a 3-doc corpus") {
  TokenizerConfig cfg;
  std::vector<Document> docs = {doc("d1", "the quick brown fox fox"),
                                doc("d2", "the lazy dog"),
                                doc("d3", "fox dog fox dog the the")};
  auto index = build_index(docs, cfg, 1.2, 0.75);
  std::vector<std::vector<std::string>> raw_tokens;
  for (const auto& d : docs) raw_tokens.push_back(tokenize(d.text, cfg));
  const std::vector<std::string> query = {"fox", "the", "dog"};
  for (size_t i = 0; i < docs.size(); ++i) {
    const double expect = juris::testing::oracle_bm25(raw_tokens, i, query, 1.2, 0.75);
    CHECK(bm25_score(index, query, docs[i].id) == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("normalize_per_query") {
  auto out = normalize_per_query({{"d1", 2.0}, {"d2", 4.0}});
  CHECK(out.at("d1") == doctest::Approx(0.5));
  CHECK(out.at("d2") == 1.0);

  auto zeros = normalize_per_query({{"d1", 0.0}, {"d2", 0.0}});
  CHECK(zeros.at("d1") == 0.0);
  CHECK(zeros.at("d2") == 0.0);

  auto single = normalize_per_query({{"d1", 7.3}});
  CHECK(single.at("d1") == 1.0);

  CHECK_THROWS_AS(normalize_per_query({}), DataError);
}

TEST_CASE("normalized pools peak at exactly 1.0") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    std::map<std::string, double> scores;
    const int n = 1 + static_cast<int>(rng.uniform_int(20));
    for (int i = 0; i < n; ++i) {
      scores["d" + std::to_string(i)] = rng.uniform() * 10.0 + 1e-6;
    }
    auto norm = normalize_per_query(scores);
    double max_val = 0.0;
    for (const auto& [id, v] : norm) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      max_val = std::max(max_val, v);
    }
    CHECK(max_val == 1.0);
  }
}

TEST_CASE("index serialization round-trips") {
  juris::testing::TempDir tmp;
  TokenizerConfig cfg{TokenizerMode::kCjkBigramHybrid, false};
  auto index = build_index({doc("d1", "盗窃罪 case"), doc("d2", "fraud 诈骗")}, cfg, 0.9, 0.4);
  index.save(tmp.file("index.json"));
  auto loaded = InvertedIndex::load(tmp.file("index.json"));
  CHECK(loaded == index);
  CHECK(bm25_score(loaded, {"盗窃"}, "d1") == bm25_score(index, {"盗窃"}, "d1"));
}
