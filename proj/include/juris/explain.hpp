#pragma once

#include <array>
#include <functional>
#include <vector>

#include "juris/features.hpp"
#include "juris/scorer.hpp"

namespace juris {

struct Attribution {
  std::array<double, FeatureVector::kDim> phi{};
  double base_value = 0.0;      // f at the baseline vector
  double instance_value = 0.0;  // f at the instance
};

using ScoreFn = std::function<double(const FeatureVector&)>;

// Exact Shapley values by enumerating all 2^5 coalitions: coalition members
// take instance values, the rest take baseline values. Satisfies efficiency
// (sum phi = f(v) - f(baseline)), symmetry, and dummy exactly up to
// floating-point roundoff.
Attribution exact_shapley(const ScoreFn& f, const FeatureVector& v,
                          const FeatureVector& baseline);
Attribution exact_shapley(const ScorerModel& model, const FeatureVector& v,
                          const FeatureVector& baseline);

// Mean |phi| per feature over a set of instances.
std::array<double, FeatureVector::kDim> global_importance(
    const ScorerModel& model, const std::vector<FeatureVector>& instances,
    const FeatureVector& baseline);

// Component-wise mean; the standard expected-value baseline.
FeatureVector mean_feature_vector(const std::vector<FeatureVector>& instances);

}  // namespace juris
