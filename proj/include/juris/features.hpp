#pragma once

#include <array>
#include <set>
#include <string>
#include <vector>

#include "juris/corpus.hpp"
#include "juris/inference.hpp"

namespace juris {

// The five evidence views for one (query, candidate) pair:
//   v1 charge confidence, v2 element confidence (latent confidence view),
//   v3 charge-hit indicator, v4 element support ratio (structural view),
//   v5 per-query-normalized BM25 (lexical view).
struct FeatureVector {
  double v1 = 0.0;
  double v2 = 0.0;
  double v3 = 0.0;
  double v4 = 0.0;
  double v5 = 0.0;

  static constexpr int kDim = 5;
  static const std::array<std::string, 5>& names();

  double operator[](int i) const;
  double& operator[](int i);

  bool operator==(const FeatureVector&) const = default;
};

constexpr double kDefaultEpsilon = 1e-9;

// v3 = 1 iff the inferred charges intersect the document charges.
double charge_hit(const std::set<std::string>& query_charges,
                  const std::vector<std::string>& doc_charges);

// v4 = |query_elements ∩ doc_elements| / (|query_elements| + epsilon).
double element_support(const std::set<std::string>& query_elements,
                       const std::vector<std::string>& doc_elements, double epsilon);

// norm_bm25 must already be per-query normalized into [0,1].
FeatureVector assemble_features(const IndicatorResult& indicator, const Document& doc,
                                double norm_bm25, double epsilon = kDefaultEpsilon);

}  // namespace juris
