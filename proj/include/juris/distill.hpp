#pragma once

#include <string>
#include <vector>

#include "juris/corpus.hpp"
#include "juris/taxonomy.hpp"

namespace juris {

enum class DistillStatus { kOk, kParseError, kCleanedOut };
std::string to_string(DistillStatus s);

// One document's trip through the teacher: prompt out, raw response back,
// parsed elements, and what the cleaning pass decided.
struct DistillRecord {
  std::string doc_id;
  std::string grounded_charge;
  std::string raw_response;
  std::vector<std::string> parsed_elements;
  DistillStatus status = DistillStatus::kOk;
  std::string rejection_reason;
};

// Fill the teacher prompt template: system role, grounded charge, case text
// truncated to max_chars codepoints, the four extraction constraints, and
// the JSON output schema. Purely deterministic.
std::string render_prompt(const Document& doc, const std::string& charge, int max_chars);

struct ParsedResponse {
  bool ok = false;
  std::vector<std::string> elements;  // trimmed, deduplicated, order kept
  std::string reason;                 // set when !ok
};

// Extract the "legal_elements" array from the first JSON object embedded in
// raw; surrounding prose is tolerated.
ParsedResponse parse_response(const std::string& raw);

struct CleanConfig {
  int min_elements = 2;
  int max_elements = 10;
  // Sentencing-outcome terms; any element containing one as a substring
  // rejects the record. Empty list means "use defaults".
  std::vector<std::string> forbidden_terms;
};

std::vector<std::string> default_forbidden_terms();
std::vector<std::string> load_forbidden_terms(const std::string& path);

struct CleanResult {
  std::vector<DistillRecord> kept;
  std::vector<DistillRecord> rejected;
};

// Appendix-style cleaning: drops parse failures, element counts outside
// [min, max], sentencing leakage, charge-echo elements, charges outside the
// taxonomy, and duplicate doc ids beyond the first. Output ordered by doc id.
CleanResult clean_records(std::vector<DistillRecord> records, const Taxonomy& tax,
                          const CleanConfig& cfg);

}  // namespace juris
