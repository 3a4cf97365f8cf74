#include "juris/taxonomy.hpp"

#include <json.hpp>

#include "juris/io.hpp"
#include "juris/text.hpp"

namespace juris {

using nlohmann::json;

Taxonomy load_taxonomy(const std::string& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw DataError("malformed taxonomy JSON: " + path);
  }
  Taxonomy tax;
  auto charges_it = j.find("charges");
  if (charges_it == j.end() || !charges_it->is_array()) {
    throw DataError("taxonomy " + path + ": missing \"charges\" array");
  }
  for (const auto& c : *charges_it) {
    if (!c.is_string()) throw DataError("taxonomy " + path + ": charges must be strings");
    std::string term = canonical_term(c.get<std::string>());
    if (!term.empty()) tax.charges.insert(term);
  }
  if (tax.charges.empty()) {
    throw DataError("taxonomy " + path + ": empty charge set");
  }

  auto elements_it = j.find("elements");
  if (elements_it != j.end() && elements_it->is_array()) {
    for (const auto& e : *elements_it) {
      if (!e.is_string()) throw DataError("taxonomy " + path + ": elements must be strings");
      std::string term = canonical_term(e.get<std::string>());
      if (!term.empty()) tax.elements.insert(term);
    }
  } else if (elements_it != j.end() && elements_it->is_object()) {
    for (const auto& [charge, items] : elements_it->items()) {
      std::string charge_term = canonical_term(charge);
      if (!tax.charges.count(charge_term)) {
        throw DataError("taxonomy " + path + ": element list under unknown charge \"" +
                        charge_term + "\"");
      }
      if (!items.is_array()) {
        throw DataError("taxonomy " + path + ": element map values must be arrays");
      }
      for (const auto& e : items) {
        if (!e.is_string()) throw DataError("taxonomy " + path + ": elements must be strings");
        std::string term = canonical_term(e.get<std::string>());
        if (term.empty()) continue;
        tax.elements.insert(term);
        tax.element_index[charge_term].insert(term);
      }
    }
  } else if (elements_it != j.end()) {
    throw DataError("taxonomy " + path + ": \"elements\" must be an array or object");
  }
  return tax;
}

std::pair<std::set<std::string>, std::set<std::string>> filter_valid(
    const std::set<std::string>& raw_charges,
    const std::set<std::string>& raw_elements, const Taxonomy& tax) {
  std::set<std::string> charges;
  for (const auto& c : raw_charges) {
    std::string term = canonical_term(c);
    if (tax.charges.count(term)) charges.insert(std::move(term));
  }
  std::set<std::string> elements;
  for (const auto& e : raw_elements) {
    std::string term = canonical_term(e);
    if (tax.elements.count(term)) elements.insert(std::move(term));
  }
  if (tax.has_element_index()) {
    std::set<std::string> admissible;
    for (const auto& c : charges) {
      auto it = tax.element_index.find(c);
      if (it == tax.element_index.end()) continue;
      admissible.insert(it->second.begin(), it->second.end());
    }
    std::set<std::string> kept;
    for (const auto& e : elements) {
      if (admissible.count(e)) kept.insert(e);
    }
    elements = std::move(kept);
  }
  return {std::move(charges), std::move(elements)};
}

}  // namespace juris
