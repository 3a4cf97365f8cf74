#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>

namespace juris {

// Closed legal vocabularies. Membership is exact string match on
// canonical_term() output — fuzzy matching would re-admit hallucinated
// terms, which is the thing the filter exists to stop.
struct Taxonomy {
  std::set<std::string> charges;
  std::set<std::string> elements;
  // Optional charge -> admissible elements map. Empty means element
  // validity is charge-independent.
  std::map<std::string, std::set<std::string>> element_index;

  bool has_element_index() const { return !element_index.empty(); }
};

// taxonomy.json: {"charges":[...], "elements":[...]} or
// {"charges":[...], "elements":{"<charge>":[...], ...}}. The map form
// populates element_index; keys must be declared charges.
Taxonomy load_taxonomy(const std::string& path);

// Keep only in-taxonomy terms. When element_index is present, surviving
// elements must also be admissible under at least one surviving charge.
// Empty results are legal outputs, not errors.
std::pair<std::set<std::string>, std::set<std::string>> filter_valid(
    const std::set<std::string>& raw_charges,
    const std::set<std::string>& raw_elements, const Taxonomy& tax);

}  // namespace juris
