#include <doctest.h>

#include "juris/distill.hpp"
#include "juris/text.hpp"
#include "support/tempdir.hpp"

using namespace juris;

namespace {

Document make_doc(std::string id, std::string text) {
  Document d;
  d.id = std::move(id);
  d.text = std::move(text);
  return d;
}

DistillRecord ok_record(std::string id, std::string charge,
                        std::vector<std::string> elements) {
  DistillRecord r;
  r.doc_id = std::move(id);
  r.grounded_charge = std::move(charge);
  r.parsed_elements = std::move(elements);
  r.status = DistillStatus::kOk;
  return r;
}

Taxonomy theft_taxonomy() {
  Taxonomy tax;
  tax.charges = {"theft"};
  tax.elements = {"e1", "e2", "e3"};
  return tax;
}

}  // namespace

TEST_CASE("render_prompt embeds charge and full short text") {
  auto prompt = render_prompt(make_doc("d1", "short text"), "theft", 500);
  CHECK(prompt.find("theft") != std::string::npos);
  CHECK(prompt.find("short text") != std::string::npos);
  CHECK(prompt.find(R"({"legal_elements": ["Element 1", "Element 2", ...]})") !=
        std::string::npos);
}

TEST_CASE("render_prompt truncates long text to max_chars codepoints") {
  std::string long_text(2000, 'x');
  auto prompt = render_prompt(make_doc("d1", long_text), "theft", 500);
  CHECK(prompt.find(std::string(500, 'x')) != std::string::npos);
  CHECK(prompt.find(std::string(501, 'x')) == std::string::npos);
}

TEST_CASE("render_prompt truncation never splits a multi-byte sequence") {
  std::string cjk;
  for (int i = 0; i < 100; ++i) cjk += "盗";
  auto prompt = render_prompt(make_doc("d1", cjk), "盗窃", 10);
  size_t count = 0;
  for (size_t i = 0; i + 2 < prompt.size(); ++i) {
    if (prompt.compare(i, 3, "盗") == 0) ++count;
  }
  CHECK(count == 11);  // 10 in the body + 1 in the charge line
}

TEST_CASE("render_prompt is deterministic") {
  auto doc = make_doc("d1", "case content here");
  CHECK(render_prompt(doc, "theft", 100) == render_prompt(doc, "theft", 100));
}

TEST_CASE("parse_response") {
  SUBCASE("plain object") {
    auto out = parse_response(R"({"legal_elements":["e1","e2"]})");
    REQUIRE(out.ok);
    CHECK(out.elements == std::vector<std::string>{"e1", "e2"});
  }
  SUBCASE("object embedded in prose") {
    auto out = parse_response(R"(Sure! {"legal_elements":["e1"]} hope that helps)");
    REQUIRE(out.ok);
    CHECK(out.elements == std::vector<std::string>{"e1"});
  }
  SUBCASE("wrong key is a parse error") {
    auto out = parse_response(R"({"elements":["e1"]})");
    CHECK_FALSE(out.ok);
  }
  SUBCASE("no JSON at all") {
    CHECK_FALSE(parse_response("no structure here").ok);
  }
  SUBCASE("non-string entries") {
    CHECK_FALSE(parse_response(R"({"legal_elements":["e1",42]})").ok);
  }
  SUBCASE("trims and dedups preserving order") {
    auto out = parse_response(R"({"legal_elements":[" b ","a","b"]})");
    REQUIRE(out.ok);
    CHECK(out.elements == std::vector<std::string>{"b", "a"});
  }
  SUBCASE("braces inside strings do not confuse the scanner") {
    auto out = parse_response(R"(note {not json} {"legal_elements":["a{b}"]})");
    REQUIRE(out.ok);
    CHECK(out.elements == std::vector<std::string>{"a{b}"});
  }
}

TEST_CASE("clean_records rules") {
  Taxonomy tax = theft_taxonomy();
  CleanConfig cfg;

  SUBCASE("clean record with enough elements is kept") {
    auto result = clean_records({ok_record("d1", "theft", {"e1", "e2", "e3", "e4", "e5"})},
                                tax, cfg);
    CHECK(result.kept.size() == 1);
    CHECK(result.rejected.empty());
  }
  SUBCASE("sentencing leakage rejects") {
    auto result = clean_records(
        {ok_record("d1", "theft",
                   {"e1", "fixed-term imprisonment of two years", "e2"})},
        tax, cfg);
    REQUIRE(result.rejected.size() == 1);
    CHECK(result.rejected[0].rejection_reason == "sentencing-leakage");
  }
  SUBCASE("count bounds reject too few and too many") {
    auto low = clean_records({ok_record("d1", "theft", {"e1"})}, tax, cfg);
    REQUIRE(low.rejected.size() == 1);
    CHECK(low.rejected[0].rejection_reason == "count-bounds");
    std::vector<std::string> many;
    for (int i = 0; i < 11; ++i) many.push_back("elem" + std::to_string(i));
    auto high = clean_records({ok_record("d1", "theft", many)}, tax, cfg);
    CHECK(high.rejected.size() == 1);
  }
  SUBCASE("charge echoes reject") {
    auto result = clean_records({ok_record("d1", "theft", {"e1", "theft", "e2"})}, tax, cfg);
    REQUIRE(result.rejected.size() == 1);
    CHECK(result.rejected[0].rejection_reason == "charge-echo");
  }
  SUBCASE("duplicate doc ids beyond the first reject") {
    auto result = clean_records({ok_record("d1", "theft", {"e1", "e2"}),
                                 ok_record("d1", "theft", {"e2", "e3"})},
                                tax, cfg);
    CHECK(result.kept.size() == 1);
    REQUIRE(result.rejected.size() == 1);
    CHECK(result.rejected[0].rejection_reason == "duplicate-doc-id");
  }
  SUBCASE("charges outside the taxonomy reject") {
    auto result = clean_records({ok_record("d1", "jaywalking", {"e1", "e2"})}, tax, cfg);
    REQUIRE(result.rejected.size() == 1);
    CHECK(result.rejected[0].rejection_reason == "unknown-charge");
  }
  SUBCASE("parse errors carry through to rejected") {
    DistillRecord r;
    r.doc_id = "d1";
    r.grounded_charge = "theft";
    r.status = DistillStatus::kParseError;
    r.rejection_reason = "no JSON object found";
    auto result = clean_records({r}, tax, cfg);
    REQUIRE(result.rejected.size() == 1);
    CHECK(result.rejected[0].status == DistillStatus::kParseError);
  }
}

TEST_CASE("clean_records partitions its input and orders by doc id") {
  Taxonomy tax = theft_taxonomy();
  CleanConfig cfg;
  std::vector<DistillRecord> records = {
      ok_record("d3", "theft", {"e1", "e2"}),
      ok_record("d1", "theft", {"e1"}),                  // count-bounds
      ok_record("d2", "theft", {"e1", "e2", "e3"}),
      ok_record("d0", "theft", {"e1", "imprisonment"}),  // leakage
  };
  auto result = clean_records(records, tax, cfg);
  CHECK(result.kept.size() + result.rejected.size() == records.size());
  for (size_t i = 1; i < result.kept.size(); ++i) {
    CHECK(result.kept[i - 1].doc_id < result.kept[i].doc_id);
  }
  for (size_t i = 1; i < result.rejected.size(); ++i) {
    CHECK(result.rejected[i - 1].doc_id < result.rejected[i].doc_id);
  }
}

TEST_CASE("clean_records is idempotent on its kept set") {
  Taxonomy tax = theft_taxonomy();
  CleanConfig cfg;
  std::vector<DistillRecord> records = {
      ok_record("d1", "theft", {"e1", "e2"}),
      ok_record("d2", "theft", {"e1", "detention pending trial"}),
      ok_record("d3", "theft", {"e1", "e2", "e3"}),
  };
  auto first = clean_records(records, tax, cfg);
  auto second = clean_records(first.kept, tax, cfg);
  CHECK(second.rejected.empty());
  REQUIRE(second.kept.size() == first.kept.size());
  for (size_t i = 0; i < first.kept.size(); ++i) {
    CHECK(second.kept[i].doc_id == first.kept[i].doc_id);
  }
}

TEST_CASE("no kept record contains a forbidden term") {
  Taxonomy tax = theft_taxonomy();
  CleanConfig cfg;
  cfg.forbidden_terms = {"prison", "赔偿"};
  std::vector<DistillRecord> records = {
      ok_record("d1", "theft", {"clean element", "another"}),
      ok_record("d2", "theft", {"went to prison", "x"}),
      ok_record("d3", "theft", {"民事赔偿若干", "y"}),
  };
  auto result = clean_records(records, tax, cfg);
  for (const auto& rec : result.kept) {
    for (const auto& e : rec.parsed_elements) {
      for (const auto& term : cfg.forbidden_terms) {
        CHECK(e.find(term) == std::string::npos);
      }
    }
  }
  CHECK(result.kept.size() == 1);
}

TEST_CASE("default forbidden terms load from a data file") {
  juris::testing::TempDir tmp;
  auto path = tmp.write("terms.txt", "# comment line\nimprisonment\n拘役\n\n");
  auto terms = load_forbidden_terms(path);
  CHECK(terms == std::vector<std::string>{"imprisonment", "拘役"});
  CHECK_FALSE(default_forbidden_terms().empty());
}
