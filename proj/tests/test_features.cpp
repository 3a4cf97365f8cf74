#include <doctest.h>

#include "juris/features.hpp"
#include "juris/io.hpp"
#include "juris/rng.hpp"

using namespace juris;

TEST_CASE("charge_hit") {
  CHECK(charge_hit({"theft"}, {"robbery", "theft"}) == 1.0);
  CHECK(charge_hit({"theft"}, {"fraud"}) == 0.0);
  CHECK(charge_hit({}, {"theft"}) == 0.0);
}

TEST_CASE("element_support") {
  CHECK(element_support({"a", "b"}, {"a", "c"}, 1e-9) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(element_support({}, {"a"}, 1e-9) == 0.0);
  CHECK(element_support({"a", "b"}, {"a", "b", "c"}, 1e-9) ==
        doctest::Approx(1.0).epsilon(1e-8));
  CHECK_THROWS_AS(element_support({"a"}, {"a"}, 0.0), DataError);
}

TEST_CASE("assemble_features composes the three views") {
  IndicatorResult ind;
  ind.charges = {"theft"};
  ind.elements = {"a", "b"};
  ind.charge_confidence = 0.9;
  ind.element_confidence = 0.8;
  Document doc;
  doc.charges = {"theft"};
  doc.elements = {"a"};
  FeatureVector v = assemble_features(ind, doc, 0.5);
  CHECK(v.v1 == 0.9);
  CHECK(v.v2 == 0.8);
  CHECK(v.v3 == 1.0);
  CHECK(v.v4 == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(v.v5 == 0.5);
}

TEST_CASE("assemble_features degenerate cases") {
  IndicatorResult empty;
  Document doc;
  FeatureVector v = assemble_features(empty, doc, 0.0);
  CHECK(v == FeatureVector{});

  IndicatorResult ind;
  ind.elements = {"a", "b"};
  Document no_elems;
  no_elems.charges = {"x"};
  CHECK(assemble_features(ind, no_elems, 0.0).v4 == 0.0);
}

TEST_CASE("assemble_features rejects out-of-range lexical input") {
  IndicatorResult ind;
  Document doc;
  CHECK_THROWS_AS(assemble_features(ind, doc, 1.5), DataError);
  CHECK_THROWS_AS(assemble_features(ind, doc, -0.1), DataError);
}

TEST_CASE("feature ranges hold for randomized inputs") {
  Rng rng(3);
  const std::vector<std::string> pool = {"a", "b", "c", "d", "e", "f"};
  for (int trial = 0; trial < 500; ++trial) {
    IndicatorResult ind;
    for (const auto& s : pool) {
      if (rng.uniform() < 0.4) ind.elements.insert(s);
    }
    if (rng.uniform() < 0.5) ind.charges.insert("theft");
    ind.charge_confidence = rng.uniform();
    ind.element_confidence = rng.uniform();
    Document doc;
    if (rng.uniform() < 0.5) doc.charges = {"theft"};
    std::vector<std::string> docel;
    for (const auto& s : pool) {
      if (rng.uniform() < 0.4) docel.push_back(s);
    }
    doc.elements = docel;
    FeatureVector v = assemble_features(ind, doc, rng.uniform());
    for (int i = 0; i < FeatureVector::kDim; ++i) {
      CHECK(v[i] >= 0.0);
      CHECK(v[i] <= 1.0);
    }
    CHECK((v.v3 == 0.0 || v.v3 == 1.0));
  }
}

TEST_CASE("v4 is monotone in doc elements under set inclusion") {
  IndicatorResult ind;
  ind.elements = {"a", "b", "c"};
  Document small, big;
  small.elements = {"a"};
  big.elements = {"a", "b", "x"};
  CHECK(element_support(ind.elements, big.elements, 1e-9) >=
        element_support(ind.elements, small.elements, 1e-9));
}

TEST_CASE("feature assembly is pure") {
  IndicatorResult ind;
  ind.charges = {"x"};
  ind.elements = {"a"};
  ind.charge_confidence = 0.123456789;
  ind.element_confidence = 0.987654321;
  Document doc;
  doc.charges = {"x"};
  doc.elements = {"a", "b"};
  FeatureVector v1 = assemble_features(ind, doc, 0.25);
  FeatureVector v2 = assemble_features(ind, doc, 0.25);
  CHECK(v1 == v2);
}
