#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "juris/corpus.hpp"
#include "juris/features.hpp"
#include "juris/rng.hpp"

namespace juris {

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 64;
  int epochs = 50;
  int neg_ratio = 3;
  double dropout = 0.1;
  uint64_t seed = 42;

  void validate() const;
};

// 5 -> 64 -> 32 -> 1 MLP, rectifier hidden layers, logistic output.
// Zero-initialized by default (forward gives 0.5 everywhere); use init() for
// the seeded fan-based uniform scheme.
struct ScorerModel {
  static constexpr std::array<int, 4> kLayerSizes{FeatureVector::kDim, 64, 32, 1};

  Eigen::MatrixXd w1{Eigen::MatrixXd::Zero(64, FeatureVector::kDim)};
  Eigen::VectorXd b1{Eigen::VectorXd::Zero(64)};
  Eigen::MatrixXd w2{Eigen::MatrixXd::Zero(32, 64)};
  Eigen::VectorXd b2{Eigen::VectorXd::Zero(32)};
  Eigen::MatrixXd w3{Eigen::MatrixXd::Zero(1, 32)};
  Eigen::VectorXd b3{Eigen::VectorXd::Zero(1)};

  double dropout_rate = 0.1;
  uint64_t rng_seed = 0;
  // Mask stream for training-mode passes; inference never touches it.
  Rng dropout_rng{0};
  // Echo of the config the model was trained with; serialized alongside the
  // weights so runs are reconstructible from the model file alone.
  TrainConfig trained_with;

  static ScorerModel init(uint64_t seed, double dropout_rate);

  // Deterministic inference pass.
  double forward(const FeatureVector& v) const;

  int num_params() const;
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::VectorXd& params);

  std::string to_json_string() const;
  static ScorerModel from_json_string(const std::string& text);
  void save(const std::string& path) const;
  static ScorerModel load(const std::string& path);
};

// training=true applies inverted dropout with masks drawn from the model's
// seeded stream (and therefore advances it).
double mlp_forward(ScorerModel& model, const FeatureVector& v, bool training);
inline double mlp_forward(const ScorerModel& model, const FeatureVector& v) {
  return model.forward(v);
}

// The "rule-based rank" ablation: unweighted sum of the five views.
double rule_score(const FeatureVector& v);

// First neg_ratio * num_pos non-positive ids in BM25 order; all available
// when fewer exist. Output is disjoint from the positive set by construction.
std::vector<std::string> mine_hard_negatives(const Query& query, const QrelSet& qrels,
                                             const std::vector<std::string>& bm25_ranking,
                                             int neg_ratio, int num_pos);

struct TrainExample {
  FeatureVector v;
  double label = 0.0;  // 1 positive / 0 negative
};

struct TrainResult {
  ScorerModel model;
  std::vector<double> loss_curve;  // per-epoch mean BCE
};

// Mini-batch BCE with adaptive-moment updates (decay 0.9/0.999, eps 1e-8).
// Deterministic for a fixed config: same cfg+seed gives bitwise-equal weights.
TrainResult train_scorer(const std::vector<TrainExample>& examples, const TrainConfig& cfg);

// Mean BCE over the batch and its gradient w.r.t. the flattened parameters,
// dropout disabled. Shared by the trainer, gradient tests, and the
// finite-difference acceptance check.
double bce_loss_and_grad(const ScorerModel& model, const std::vector<TrainExample>& batch,
                         Eigen::VectorXd* grad_out);

}  // namespace juris
