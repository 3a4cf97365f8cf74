#include <doctest.h>

#include "juris/io.hpp"
#include "juris/rng.hpp"
#include "juris/taxonomy.hpp"
#include "support/tempdir.hpp"

using namespace juris;
using juris::testing::TempDir;

namespace {

Taxonomy tiny_taxonomy() {
  Taxonomy tax;
  tax.charges = {"theft"};
  tax.elements = {"e1"};
  return tax;
}

}  // namespace

TEST_CASE("load_taxonomy flat form") {
  TempDir tmp;
  auto path = tmp.write("tax.json",
      R"({"charges":["theft"],"elements":["secretly taking property"]})");
  Taxonomy tax = load_taxonomy(path);
  CHECK(tax.charges.size() == 1);
  CHECK(tax.elements.size() == 1);
  CHECK_FALSE(tax.has_element_index());
}

TEST_CASE("load_taxonomy map form requires known charges") {
  TempDir tmp;
  auto good = tmp.write("good.json",
      R"({"charges":["theft"],"elements":{"theft":["e1"]}})");
  Taxonomy tax = load_taxonomy(good);
  CHECK(tax.has_element_index());
  CHECK(tax.element_index.at("theft").count("e1") == 1);

  auto bad = tmp.write("bad.json",
      R"({"charges":["theft"],"elements":{"theft":["e1"],"robbery":["e2"]}})");
  CHECK_THROWS_WITH_AS(load_taxonomy(bad), doctest::Contains("robbery"), DataError);
}

TEST_CASE("load_taxonomy dedups silently and rejects empty charges") {
  TempDir tmp;
  auto dup = tmp.write("dup.json", R"({"charges":["theft","theft"],"elements":["e1"]})");
  CHECK(load_taxonomy(dup).charges.size() == 1);
  auto empty = tmp.write("empty.json", R"({"charges":[],"elements":["e1"]})");
  CHECK_THROWS_AS(load_taxonomy(empty), DataError);
}

TEST_CASE("filter_valid intersects with the vocabularies") {
  Taxonomy tax = tiny_taxonomy();
  auto [c1, e1] = filter_valid({"theft", "madeup_crime"}, {"e1"}, tax);
  CHECK(c1 == std::set<std::string>{"theft"});
  CHECK(e1 == std::set<std::string>{"e1"});

  auto [c2, e2] = filter_valid({}, {"e1", "e_hallucinated"}, tax);
  CHECK(c2.empty());
  CHECK(e2 == std::set<std::string>{"e1"});
}

TEST_CASE("filter_valid enforces charge-conditioned admissibility when indexed") {
  Taxonomy tax;
  tax.charges = {"theft", "robbery"};
  tax.elements = {"e1", "e2"};
  tax.element_index = {{"theft", {"e1"}}, {"robbery", {"e2"}}};
  // e2 is a valid element but not admissible under the surviving charge.
  auto [c, e] = filter_valid({"theft"}, {"e1", "e2"}, tax);
  CHECK(c == std::set<std::string>{"theft"});
  CHECK(e == std::set<std::string>{"e1"});
}

TEST_CASE("filter_valid canonicalizes whitespace before matching") {
  Taxonomy tax = tiny_taxonomy();
  auto [c, e] = filter_valid({"  theft "}, {"e1\t"}, tax);
  CHECK(c.count("theft") == 1);
  CHECK(e.count("e1") == 1);
}

TEST_CASE("filter_valid properties: subset, idempotence, taxonomy monotonicity") {
  Rng rng(7);
  const std::vector<std::string> universe = {"a", "b", "c", "d", "e", "f", "g", "h"};
  for (int trial = 0; trial < 200; ++trial) {
    auto pick = [&](double p) {
      std::set<std::string> out;
      for (const auto& s : universe) {
        if (rng.uniform() < p) out.insert(s);
      }
      return out;
    };
    Taxonomy small;
    small.charges = pick(0.4);
    small.elements = pick(0.4);
    if (small.charges.empty()) small.charges = {"a"};
    Taxonomy big = small;
    big.charges.insert("zz");
    for (const auto& s : pick(0.5)) big.elements.insert(s + "_x");
    big.elements.insert(universe.begin(), universe.end());

    auto raw_c = pick(0.5);
    auto raw_e = pick(0.5);
    auto [c, e] = filter_valid(raw_c, raw_e, small);
    for (const auto& s : c) {
      CHECK(raw_c.count(s) == 1);
      CHECK(small.charges.count(s) == 1);
    }
    for (const auto& s : e) {
      CHECK(raw_e.count(s) == 1);
      CHECK(small.elements.count(s) == 1);
    }
    auto [c2, e2] = filter_valid(c, e, small);
    CHECK(c2 == c);
    CHECK(e2 == e);

    auto [c3, e3] = filter_valid(raw_c, raw_e, big);
    for (const auto& s : c) CHECK(c3.count(s) == 1);
    for (const auto& s : e) CHECK(e3.count(s) == 1);
  }
}
