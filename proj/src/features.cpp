#include "juris/features.hpp"

#include <stdexcept>

#include "juris/io.hpp"

namespace juris {

const std::array<std::string, 5>& FeatureVector::names() {
  static const std::array<std::string, 5> kNames{"v1", "v2", "v3", "v4", "v5"};
  return kNames;
}

double FeatureVector::operator[](int i) const {
  switch (i) {
    case 0: return v1;
    case 1: return v2;
    case 2: return v3;
    case 3: return v4;
    case 4: return v5;
  }
  throw std::out_of_range("FeatureVector index");
}

double& FeatureVector::operator[](int i) {
  switch (i) {
    case 0: return v1;
    case 1: return v2;
    case 2: return v3;
    case 3: return v4;
    case 4: return v5;
  }
  throw std::out_of_range("FeatureVector index");
}

double charge_hit(const std::set<std::string>& query_charges,
                  const std::vector<std::string>& doc_charges) {
  for (const auto& c : doc_charges) {
    if (query_charges.count(c)) return 1.0;
  }
  return 0.0;
}

double element_support(const std::set<std::string>& query_elements,
                       const std::vector<std::string>& doc_elements, double epsilon) {
  if (epsilon <= 0.0) throw DataError("element_support: epsilon must be > 0");
  size_t hits = 0;
  for (const auto& e : doc_elements) {
    if (query_elements.count(e)) ++hits;
  }
  return static_cast<double>(hits) /
         (static_cast<double>(query_elements.size()) + epsilon);
}

FeatureVector assemble_features(const IndicatorResult& indicator, const Document& doc,
                                double norm_bm25, double epsilon) {
  if (norm_bm25 < 0.0 || norm_bm25 > 1.0) {
    throw DataError("assemble_features: norm_bm25 = " + format_double(norm_bm25) +
                    " outside [0,1]");
  }
  FeatureVector v;
  v.v1 = indicator.charge_confidence;
  v.v2 = indicator.element_confidence;
  v.v3 = charge_hit(indicator.charges, doc.charges);
  v.v4 = element_support(indicator.elements, doc.elements, epsilon);
  v.v5 = norm_bm25;
  return v;
}

}  // namespace juris
