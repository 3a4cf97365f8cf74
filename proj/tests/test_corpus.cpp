#include <doctest.h>

#include "juris/corpus.hpp"
#include "juris/io.hpp"
#include "support/tempdir.hpp"

using namespace juris;
using juris::testing::TempDir;

TEST_CASE("load_corpus maps fields and set semantics") {
  TempDir tmp;
  auto path = tmp.write("corpus.jsonl",
      R"({"id":"d1","text":"t","charges":["theft"],"elements":["secretly taking property"]})"
      "\n"
      R"({"id":"d2","text":"u","charges":[],"elements":["a","a"]})"
      "\n");
  auto docs = load_corpus(path);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].id == "d1");
  CHECK(docs[0].text == "t");
  CHECK(docs[0].charges == std::vector<std::string>{"theft"});
  CHECK(docs[0].elements == std::vector<std::string>{"secretly taking property"});
  CHECK(docs[1].elements == std::vector<std::string>{"a"});  // deduplicated
}

TEST_CASE("load_corpus rejects duplicate ids, naming the id") {
  TempDir tmp;
  auto path = tmp.write("corpus.jsonl",
      R"({"id":"d1","text":"a"})" "\n" R"({"id":"d1","text":"b"})" "\n");
  CHECK_THROWS_WITH_AS(load_corpus(path), doctest::Contains("d1"), DataError);
}

TEST_CASE("load_corpus positions malformed JSON errors") {
  TempDir tmp;
  auto path = tmp.write("corpus.jsonl", R"({"id":"d1","text":"a"})" "\n{oops\n");
  CHECK_THROWS_WITH_AS(load_corpus(path), doctest::Contains(":2:"), DataError);
}

TEST_CASE("load_corpus ignores unknown fields and preserves order") {
  TempDir tmp;
  auto path = tmp.write("corpus.jsonl",
      R"({"id":"z","text":"a","future_field":1})" "\n"
      R"({"id":"a","text":"b"})" "\n");
  auto docs = load_corpus(path);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].id == "z");
  CHECK(docs[1].id == "a");
}

TEST_CASE("corpus round-trips through serialization") {
  TempDir tmp;
  auto path = tmp.write("corpus.jsonl",
      R"({"id":"d1","text":"some text","charges":["b","a"],"elements":["e2","e1","e2"]})" "\n"
      R"({"id":"d2","text":"","charges":[],"elements":[]})" "\n");
  auto docs = load_corpus(path);
  save_corpus(docs, tmp.file("copy.jsonl"));
  auto reloaded = load_corpus(tmp.file("copy.jsonl"));
  CHECK(docs == reloaded);
}

TEST_CASE("load_queries defaults and pool validation") {
  TempDir tmp;
  auto path = tmp.write("queries.jsonl",
      R"({"id":"q1","text":"narrative","pool":["d1","d2"]})" "\n"
      R"({"id":"q2","text":"no pool"})" "\n");
  auto queries = load_queries(path);
  REQUIRE(queries.size() == 2);
  CHECK(queries[0].pool == std::vector<std::string>{"d1", "d2"});
  CHECK(queries[1].pool.empty());

  auto bad = tmp.write("bad.jsonl", R"({"id":"q1","text":"t","pool":["d1","d1"]})" "\n");
  CHECK_THROWS_AS(load_queries(bad), DataError);
}

TEST_CASE("load_qrels thresholds") {
  TempDir tmp;
  auto path = tmp.write("qrels.tsv", "q1\td1\t3\nq1\td2\t2\n");
  SUBCASE("threshold 3") {
    QrelSet qrels = load_qrels(path, 3);
    CHECK(qrels.is_positive("q1", "d1"));
    CHECK_FALSE(qrels.is_positive("q1", "d2"));
  }
  SUBCASE("threshold 2") {
    QrelSet qrels = load_qrels(path, 2);
    CHECK(qrels.is_positive("q1", "d2"));
  }
}

TEST_CASE("load_qrels rejects non-integer labels with position") {
  TempDir tmp;
  auto path = tmp.write("qrels.tsv", "q1\td1\t3\nq1\td2\tx\n");
  CHECK_THROWS_WITH_AS(load_qrels(path, 1), doctest::Contains(":2:"), DataError);
}

TEST_CASE("load_qrels rejects duplicate pairs and negative labels") {
  TempDir tmp;
  CHECK_THROWS_AS(load_qrels(tmp.write("a.tsv", "q1\td1\t1\nq1\td1\t2\n"), 1), DataError);
  CHECK_THROWS_AS(load_qrels(tmp.write("b.tsv", "q1\td1\t-1\n"), 1), DataError);
}

TEST_CASE("lowering the positive threshold never shrinks the positive set") {
  TempDir tmp;
  auto path = tmp.write("qrels.tsv", "q1\td1\t3\nq1\td2\t2\nq1\td3\t1\nq2\td4\t0\n");
  for (int hi = 3; hi >= 1; --hi) {
    QrelSet strict = load_qrels(path, hi);
    QrelSet loose = load_qrels(path, hi - 1);
    for (const auto& [key, label] : strict.entries()) {
      (void)label;
      if (strict.is_positive(key.first, key.second)) {
        CHECK(loose.is_positive(key.first, key.second));
      }
    }
  }
}
