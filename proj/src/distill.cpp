#include "juris/distill.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

#include "juris/io.hpp"
#include "juris/text.hpp"

namespace juris {

using nlohmann::json;

std::string to_string(DistillStatus s) {
  switch (s) {
    case DistillStatus::kOk: return "ok";
    case DistillStatus::kParseError: return "parse_error";
    case DistillStatus::kCleanedOut: return "cleaned_out";
  }
  return "ok";
}

std::string render_prompt(const Document& doc, const std::string& charge, int max_chars) {
  if (charge.empty()) throw DataError("render_prompt: empty charge");
  const std::string text =
      truncate_codepoints(doc.text, max_chars < 0 ? 0 : static_cast<size_t>(max_chars));
  std::ostringstream p;
  p << "System Role: You are a senior legal text analysis expert. Please extract the "
       "core \"legal elements\" for the given charge from the criminal case content.\n"
    << "\n"
    << "Input Data:\n"
    << "- Convicted Charge: " << charge << "\n"
    << "- Case Content: " << text << "\n"
    << "\n"
    << "Extraction Constraints:\n"
    << "1. Task Goal: Extract 4 to 6 key legal elements that support the conviction.\n"
    << "2. Terminology: Use professional legal terminology (e.g., \"violation of "
       "transportation regulations\", \"causing death\") rather than colloquial "
       "descriptions.\n"
    << "3. Anti-Leakage (Critical): Strictly prohibit the inclusion of specific "
       "sentencing outcomes (e.g., \"fixed-term imprisonment\", \"detention\", "
       "\"compensation amount\") or explicit conviction statements.\n"
    << "4. Content: Do not simply repeat the charge name; ensure there is no semantic "
       "redundancy between elements.\n"
    << "\n"
    << "Output Format:\n"
    << "Please directly return a standard JSON object:\n"
    << "{\"legal_elements\": [\"Element 1\", \"Element 2\", ...]}\n";
  return p.str();
}

namespace {

// Locate the first balanced {...} span in raw, respecting string literals.
// Returns true and the span when found.
bool find_json_object(const std::string& raw, size_t from, size_t& begin, size_t& end) {
  size_t start = raw.find('{', from);
  while (start != std::string::npos) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (size_t i = start; i < raw.size(); ++i) {
      char c = raw[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        --depth;
        if (depth == 0) {
          begin = start;
          end = i + 1;
          return true;
        }
      }
    }
    start = raw.find('{', start + 1);
  }
  return false;
}

}  // namespace

ParsedResponse parse_response(const std::string& raw) {
  ParsedResponse out;
  size_t from = 0;
  while (true) {
    size_t begin = 0, end = 0;
    if (!find_json_object(raw, from, begin, end)) {
      out.reason = out.reason.empty() ? "no JSON object found" : out.reason;
      return out;
    }
    json j = json::parse(raw.substr(begin, end - begin), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      from = begin + 1;
      continue;
    }
    auto it = j.find("legal_elements");
    if (it == j.end()) {
      out.reason = "missing \"legal_elements\" key";
      return out;
    }
    if (!it->is_array()) {
      out.reason = "\"legal_elements\" is not an array";
      return out;
    }
    std::set<std::string> seen;
    for (const auto& e : *it) {
      if (!e.is_string()) {
        out.reason = "non-string entry in \"legal_elements\"";
        out.elements.clear();
        return out;
      }
      std::string term = trim(e.get<std::string>());
      if (term.empty()) continue;
      if (seen.insert(term).second) out.elements.push_back(std::move(term));
    }
    if (out.elements.empty()) {
      out.reason = "empty \"legal_elements\" array";
      return out;
    }
    out.ok = true;
    return out;
  }
}

std::vector<std::string> default_forbidden_terms() {
  return {
      "imprisonment", "detention",  "compensation", "probation",
      "sentenced",    "sentencing", "penalty",      "fine of",
      "有期徒刑",     "无期徒刑",   "拘役",         "管制",
      "缓刑",         "罚金",       "赔偿",         "判处",
  };
}

std::vector<std::string> load_forbidden_terms(const std::string& path) {
  std::vector<std::string> terms;
  for_each_line(path, [&](size_t line_no, const std::string& line) {
    (void)line_no;
    std::string term = trim(line);
    if (!term.empty() && term[0] != '#') terms.push_back(std::move(term));
  });
  return terms;
}

CleanResult clean_records(std::vector<DistillRecord> records, const Taxonomy& tax,
                          const CleanConfig& cfg) {
  const std::vector<std::string> forbidden =
      cfg.forbidden_terms.empty() ? default_forbidden_terms() : cfg.forbidden_terms;

  // Stable: records sharing a doc id keep their input order, so "first
  // entry wins" is well-defined.
  std::stable_sort(records.begin(), records.end(),
                   [](const DistillRecord& a, const DistillRecord& b) {
                     return a.doc_id < b.doc_id;
                   });

  CleanResult result;
  std::set<std::string> seen_ids;
  for (auto& rec : records) {
    auto reject = [&](const std::string& reason) {
      rec.status = rec.status == DistillStatus::kParseError ? DistillStatus::kParseError
                                                            : DistillStatus::kCleanedOut;
      rec.rejection_reason = reason;
      result.rejected.push_back(std::move(rec));
    };

    if (!seen_ids.insert(rec.doc_id).second) {
      reject("duplicate-doc-id");
      continue;
    }
    if (rec.status == DistillStatus::kParseError) {
      reject(rec.rejection_reason.empty() ? "parse-error" : rec.rejection_reason);
      continue;
    }
    if (!tax.charges.count(canonical_term(rec.grounded_charge))) {
      reject("unknown-charge");
      continue;
    }
    const int n = static_cast<int>(rec.parsed_elements.size());
    if (n < cfg.min_elements || n > cfg.max_elements) {
      reject("count-bounds");
      continue;
    }
    bool leaked = false;
    for (const auto& e : rec.parsed_elements) {
      for (const auto& term : forbidden) {
        if (!term.empty() && e.find(term) != std::string::npos) {
          leaked = true;
          break;
        }
      }
      if (leaked) break;
    }
    if (leaked) {
      reject("sentencing-leakage");
      continue;
    }
    bool echoes_charge = false;
    for (const auto& e : rec.parsed_elements) {
      if (e == rec.grounded_charge) {
        echoes_charge = true;
        break;
      }
    }
    if (echoes_charge) {
      reject("charge-echo");
      continue;
    }
    result.kept.push_back(std::move(rec));
  }
  return result;
}

}  // namespace juris
