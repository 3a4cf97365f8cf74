#include "juris/explain.hpp"

#include <cmath>

#include "juris/io.hpp"

namespace juris {

namespace {

constexpr int kDim = FeatureVector::kDim;

FeatureVector blend(const FeatureVector& v, const FeatureVector& baseline, unsigned mask) {
  FeatureVector out;
  for (int i = 0; i < kDim; ++i) out[i] = (mask >> i) & 1u ? v[i] : baseline[i];
  return out;
}

}  // namespace

Attribution exact_shapley(const ScoreFn& f, const FeatureVector& v,
                          const FeatureVector& baseline) {
  std::array<double, 32> value{};
  for (unsigned mask = 0; mask < 32; ++mask) value[mask] = f(blend(v, baseline, mask));

  // Shapley weight for a coalition of size s (not counting the feature
  // being added): s!(n-1-s)!/n!.
  std::array<double, kDim> factorial{};
  double fact[kDim + 1];
  fact[0] = 1.0;
  for (int i = 1; i <= kDim; ++i) fact[i] = fact[i - 1] * i;
  for (int s = 0; s < kDim; ++s) factorial[s] = fact[s] * fact[kDim - 1 - s] / fact[kDim];

  Attribution attr;
  attr.base_value = value[0];
  attr.instance_value = value[31];
  for (int i = 0; i < kDim; ++i) {
    double phi = 0.0;
    for (unsigned mask = 0; mask < 32; ++mask) {
      if ((mask >> i) & 1u) continue;
      const int size = __builtin_popcount(mask);
      phi += factorial[size] * (value[mask | (1u << i)] - value[mask]);
    }
    attr.phi[i] = phi;
  }
  return attr;
}

Attribution exact_shapley(const ScorerModel& model, const FeatureVector& v,
                          const FeatureVector& baseline) {
  return exact_shapley([&model](const FeatureVector& x) { return model.forward(x); }, v,
                       baseline);
}

std::array<double, FeatureVector::kDim> global_importance(
    const ScorerModel& model, const std::vector<FeatureVector>& instances,
    const FeatureVector& baseline) {
  if (instances.empty()) throw DataError("global_importance: empty instance set");
  std::array<double, kDim> acc{};
  for (const auto& v : instances) {
    Attribution attr = exact_shapley(model, v, baseline);
    for (int i = 0; i < kDim; ++i) acc[i] += std::abs(attr.phi[i]);
  }
  for (auto& a : acc) a /= static_cast<double>(instances.size());
  return acc;
}

FeatureVector mean_feature_vector(const std::vector<FeatureVector>& instances) {
  if (instances.empty()) throw DataError("mean_feature_vector: empty instance set");
  FeatureVector mean;
  for (const auto& v : instances) {
    for (int i = 0; i < kDim; ++i) mean[i] += v[i];
  }
  for (int i = 0; i < kDim; ++i) mean[i] /= static_cast<double>(instances.size());
  return mean;
}

}  // namespace juris
