#include <doctest.h>

#include <cmath>

#include "juris/inference.hpp"
#include "juris/io.hpp"
#include "support/tempdir.hpp"

using namespace juris;
using juris::testing::TempDir;

namespace {

Document make_doc(std::string id, std::string text, std::vector<std::string> charges,
                  std::vector<std::string> elements) {
  Document d;
  d.id = std::move(id);
  d.text = std::move(text);
  d.charges = sorted_unique(std::move(charges));
  d.elements = sorted_unique(std::move(elements));
  return d;
}

Taxonomy two_charge_taxonomy() {
  Taxonomy tax;
  tax.charges = {"fraud", "theft"};
  tax.elements = {"e1", "e2", "e3", "e4"};
  return tax;
}

Query make_query(std::string id, std::string text) {
  Query q;
  q.id = std::move(id);
  q.text = std::move(text);
  return q;
}

}  // namespace

TEST_CASE("fit_generator: balanced corpus gives ln(1/2) priors") {
  Taxonomy tax = two_charge_taxonomy();
  std::vector<Document> docs = {
      make_doc("d1", "stealing wallet", {"theft"}, {"e1"}),
      make_doc("d2", "stealing purse", {"theft"}, {"e1"}),
      make_doc("d3", "fake invoice", {"fraud"}, {"e2"}),
      make_doc("d4", "fake papers", {"fraud"}, {"e2"}),
  };
  auto model = fit_generator(docs, tax, GeneratorMode::kHierarchical, 1.0, 2, {});
  CHECK(model.charge_log_prior.at("theft") == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(model.charge_log_prior.at("fraud") == doctest::Approx(std::log(0.5)).epsilon(1e-12));
}

TEST_CASE("fit_generator: element conditionals approach count ratios as alpha -> 0") {
  Taxonomy tax = two_charge_taxonomy();
  std::vector<Document> docs;
  for (int i = 0; i < 3; ++i) {
    docs.push_back(make_doc("a" + std::to_string(i), "w", {"theft"}, {"e1"}));
  }
  docs.push_back(make_doc("b", "w", {"theft"}, {"e2"}));
  const double alpha = 1e-12;
  auto model = fit_generator(docs, tax, GeneratorMode::kHierarchical, alpha, 2, {});
  CHECK(model.element_given_charge.at("theft").at("e1") ==
        doctest::Approx(0.75).epsilon(1e-9));
  // Exact smoothed value: (3 + a) / (4 + a * |K_element|).
  auto strong = fit_generator(docs, tax, GeneratorMode::kHierarchical, 1.0, 2, {});
  CHECK(strong.element_given_charge.at("theft").at("e1") ==
        doctest::Approx((3.0 + 1.0) / (4.0 + 4.0)).epsilon(1e-12));
}

TEST_CASE("fit_generator: per-charge token distributions sum to 1 over vocab+unseen") {
  Taxonomy tax = two_charge_taxonomy();
  std::vector<Document> docs = {
      make_doc("d1", "a b b c", {"theft"}, {"e1"}),
      make_doc("d2", "c d", {"fraud"}, {"e2"}),
  };
  auto model = fit_generator(docs, tax, GeneratorMode::kHierarchical, 0.7, 2, {});
  for (const auto& [charge, terms] : model.token_loglik) {
    double total = std::exp(model.unseen_loglik.at(charge));
    for (const auto& [term, ll] : terms) {
      (void)term;
      total += std::exp(ll);
    }
    // The unseen slot counts once; remaining vocab terms all carry the
    // same unseen mass.
    size_t missing = model.vocab.size() - terms.size();
    total += static_cast<double>(missing) * std::exp(model.unseen_loglik.at(charge));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("fit_generator error paths") {
  Taxonomy tax = two_charge_taxonomy();
  CHECK_THROWS_AS(fit_generator({}, tax, GeneratorMode::kHierarchical, 1.0, 2, {}),
                  DataError);
  std::vector<Document> unlabeled = {make_doc("d", "text", {}, {})};
  CHECK_THROWS_AS(fit_generator(unlabeled, tax, GeneratorMode::kHierarchical, 1.0, 2, {}),
                  DataError);
  std::vector<Document> rogue = {make_doc("d", "text", {"smuggling"}, {})};
  CHECK_THROWS_WITH_AS(fit_generator(rogue, tax, GeneratorMode::kHierarchical, 1.0, 2, {}),
                       doctest::Contains("smuggling"), DataError);
}

TEST_CASE("infer: discriminative tokens select the right charge with confident posterior") {
  Taxonomy tax = two_charge_taxonomy();
  std::vector<Document> docs = {
      make_doc("d1", "wallet pickpocket subway", {"theft"}, {"e1", "e2"}),
      make_doc("d2", "invoice ledger forging", {"fraud"}, {"e3", "e4"}),
  };
  auto model = fit_generator(docs, tax, GeneratorMode::kHierarchical, 1.0, 2, {});
  auto result = infer(model, make_query("q1", "wallet subway"), tax);
  CHECK(result.charges == std::set<std::string>{"theft"});
  CHECK(result.charge_confidence > 0.5);

  // Hand-computed two-charge posterior for this corpus: vocab has 6 terms,
  // each doc 3 tokens, priors 1/2. P(t|c) = (count+1)/(3+7).
  const double theft_score = 0.5 * (2.0 / 10.0) * (2.0 / 10.0);
  const double fraud_score = 0.5 * (1.0 / 10.0) * (1.0 / 10.0);
  CHECK(result.charge_confidence ==
        doctest::Approx(theft_score / (theft_score + fraud_score)).epsilon(1e-9));
}

TEST_CASE("infer: zero-overlap query with symmetric counts gives a uniform posterior") {
  Taxonomy tax = two_charge_taxonomy();
  std::vector<Document> docs = {
      make_doc("d1", "aa bb", {"theft"}, {"e1"}),
      make_doc("d2", "cc dd", {"fraud"}, {"e2"}),
  };
  auto model = fit_generator(docs, tax, GeneratorMode::kHierarchical, 1.0, 2, {});
  auto result = infer(model, make_query("q1", "zz yy"), tax);
  // Lexicographically first charge wins the tie.
  CHECK(result.charges == std::set<std::string>{"fraud"});
  CHECK(result.charge_confidence == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("infer: empty query text yields the empty result") {
  Taxonomy tax = two_charge_taxonomy();
  std::vector<Document> docs = {
      make_doc("d1", "a", {"theft"}, {"e1"}),
      make_doc("d2", "b", {"fraud"}, {"e2"}),
  };
  auto model = fit_generator(docs, tax, GeneratorMode::kHierarchical, 1.0, 2, {});
  auto result = infer(model, make_query("q1", ""), tax);
  CHECK(result.charges.empty());
  CHECK(result.elements.empty());
  CHECK(result.charge_confidence == 0.0);
  CHECK(result.element_confidence == 0.0);
}

TEST_CASE("infer: single selected element carries its conditional probability") {
  GeneratorModel model;
  model.mode = GeneratorMode::kHierarchical;
  model.top_k_elements = 1;
  model.charge_log_prior = {{"theft", 0.0}};
  model.unseen_loglik = {{"theft", std::log(0.5)}};
  model.element_given_charge = {{"theft", {{"e1", 0.8}, {"e2", 0.2}}}};
  Taxonomy tax;
  tax.charges = {"theft"};
  tax.elements = {"e1", "e2"};
  auto result = infer(model, make_query("q", "anything"), tax, {});
  CHECK(result.elements == std::set<std::string>{"e1"});
  CHECK(result.element_confidence == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("posterior normalization and argmax invariance") {
  std::map<std::string, double> scores = {{"a", -3.0}, {"b", -1.5}, {"c", -7.0}};
  auto posterior = posterior_from_scores(scores);
  double total = 0.0;
  for (const auto& [c, p] : posterior) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

  // Adding a constant in log space is a positive scaling of the raw scores.
  std::map<std::string, double> shifted;
  for (const auto& [c, s] : scores) shifted[c] = s + 123.456;
  auto posterior2 = posterior_from_scores(shifted);
  for (const auto& [c, p] : posterior) {
    CHECK(posterior2.at(c) == doctest::Approx(p).epsilon(1e-9));
  }
}

TEST_CASE("hierarchical and independent modes diverge on charge-conditional elements") {
  Taxonomy tax;
  tax.charges = {"fraud", "theft"};
  tax.elements = {"t1", "t2", "f1", "f2"};
  std::vector<Document> docs;
  // Fraud dominates the marginals; theft's conditional profile differs.
  for (int i = 0; i < 8; ++i) {
    docs.push_back(make_doc("f" + std::to_string(i), "ledger invoice", {"fraud"},
                            {"f1", "f2"}));
  }
  docs.push_back(make_doc("t0", "wallet subway", {"theft"}, {"t1", "t2"}));
  docs.push_back(make_doc("t1", "wallet purse", {"theft"}, {"t1", "t2"}));

  auto hier = fit_generator(docs, tax, GeneratorMode::kHierarchical, 0.1, 2, {});
  auto indep = fit_generator(docs, tax, GeneratorMode::kIndependent, 0.1, 2, {});
  Query q = make_query("q", "wallet subway purse");
  auto r_hier = infer(hier, q, tax);
  auto r_indep = infer(indep, q, tax);
  CHECK(r_hier.charges == std::set<std::string>{"theft"});
  CHECK(r_hier.elements == std::set<std::string>{"t1", "t2"});
  CHECK(r_indep.elements == std::set<std::string>{"f1", "f2"});
  CHECK(r_hier.elements != r_indep.elements);
  CHECK(r_hier.provenance == Provenance::kHierarchical);
  CHECK(r_indep.provenance == Provenance::kIndependent);
}

TEST_CASE("fit and infer are deterministic") {
  Taxonomy tax = two_charge_taxonomy();
  std::vector<Document> docs = {
      make_doc("d1", "x y z", {"theft"}, {"e1", "e2"}),
      make_doc("d2", "p q r", {"fraud"}, {"e3"}),
  };
  auto a = fit_generator(docs, tax, GeneratorMode::kHierarchical, 1.0, 3, {});
  auto b = fit_generator(docs, tax, GeneratorMode::kHierarchical, 1.0, 3, {});
  CHECK(a.to_json_string() == b.to_json_string());
}

TEST_CASE("generator model serialization round-trips") {
  TempDir tmp;
  Taxonomy tax = two_charge_taxonomy();
  std::vector<Document> docs = {
      make_doc("d1", "x y z", {"theft"}, {"e1"}),
      make_doc("d2", "p q", {"fraud"}, {"e2"}),
  };
  auto model = fit_generator(docs, tax, GeneratorMode::kIndependent, 0.5, 4,
                             {TokenizerMode::kCjkBigramHybrid, false});
  model.save(tmp.file("gen.json"));
  auto loaded = GeneratorModel::load(tmp.file("gen.json"));
  CHECK(loaded.to_json_string() == model.to_json_string());
  auto r1 = infer(model, make_query("q", "x y"), tax);
  auto r2 = infer(loaded, make_query("q", "x y"), tax);
  CHECK(r1.charges == r2.charges);
  CHECK(r1.charge_confidence == r2.charge_confidence);
}

TEST_CASE("load_indicators applies Eq-8 style confidences and the validity filter") {
  TempDir tmp;
  Taxonomy tax = two_charge_taxonomy();
  auto path = tmp.write("ind.jsonl",
      std::string(R"({"qid":"q1","charges":["theft","nonsense"],"elements":["e1","bogus"],)") +
      R"("charge_logprob_mean":)" + std::to_string(std::log(0.9)) +
      R"(,"element_logprob_mean":null})" + "\n" +
      R"({"charges":["theft"],"elements":[]})" + "\n");
  auto file = load_indicators(path, tax);
  CHECK(file.skipped == 1);
  REQUIRE(file.by_query.count("q1") == 1);
  const auto& r = file.by_query.at("q1");
  CHECK(r.charges == std::set<std::string>{"theft"});
  CHECK(r.elements == std::set<std::string>{"e1"});
  CHECK(r.charge_confidence == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(r.element_confidence == 0.0);
  CHECK(r.provenance == Provenance::kFileBacked);
}

TEST_CASE("load_indicators rejects positive log-probabilities") {
  TempDir tmp;
  Taxonomy tax = two_charge_taxonomy();
  auto path = tmp.write("bad.jsonl",
      R"({"qid":"q1","charges":["theft"],"elements":[],"charge_logprob_mean":0.1})" "\n");
  CHECK_THROWS_AS(load_indicators(path, tax), DataError);
}

TEST_CASE("indicator files round-trip through save/load") {
  TempDir tmp;
  Taxonomy tax = two_charge_taxonomy();
  std::map<std::string, IndicatorResult> indicators;
  IndicatorResult r;
  r.charges = {"theft"};
  r.elements = {"e1", "e3"};
  r.charge_confidence = 0.75;
  r.element_confidence = 0.5;
  indicators["q1"] = r;
  save_indicators(indicators, tmp.file("ind.jsonl"));
  auto loaded = load_indicators(tmp.file("ind.jsonl"), tax);
  CHECK(loaded.by_query.at("q1").charges == r.charges);
  CHECK(loaded.by_query.at("q1").elements == r.elements);
  CHECK(loaded.by_query.at("q1").charge_confidence == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(loaded.by_query.at("q1").element_confidence == doctest::Approx(0.5).epsilon(1e-12));
}
