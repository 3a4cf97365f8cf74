#include "juris/scorer.hpp"

#include <cmath>

#include <json.hpp>

#include "juris/io.hpp"

namespace juris {

using nlohmann::json;

namespace {

constexpr double kClampLo = 1e-7;
constexpr double kClampHi = 1.0 - 1e-7;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Eigen::VectorXd to_vec(const FeatureVector& v) {
  Eigen::VectorXd x(FeatureVector::kDim);
  for (int i = 0; i < FeatureVector::kDim; ++i) x(i) = v[i];
  return x;
}

void glorot_fill(Eigen::MatrixXd& w, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      w(r, c) = (2.0 * rng.uniform() - 1.0) * limit;
    }
  }
}

// Inverted-dropout mask: 0 with probability rate, else 1/(1-rate).
Eigen::VectorXd draw_mask(Rng& rng, Eigen::Index n, double rate) {
  Eigen::VectorXd m(n);
  const double keep = 1.0 - rate;
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i) = rng.uniform() < rate ? 0.0 : 1.0 / keep;
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols,
                                 const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw DataError(std::string("scorer JSON: bad shape for ") + name);
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw DataError(std::string("scorer JSON: bad shape for ") + name);
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<size_t>(c)].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::VectorXd vector_from_json(const json& j, Eigen::Index n, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n) {
    throw DataError(std::string("scorer JSON: bad shape for ") + name);
  }
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = j[static_cast<size_t>(i)].get<double>();
  return v;
}

}  // namespace

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) throw DataError("train config: learning_rate must be > 0");
  if (batch_size <= 0) throw DataError("train config: batch_size must be > 0");
  if (epochs <= 0) throw DataError("train config: epochs must be > 0");
  if (neg_ratio < 0) throw DataError("train config: neg_ratio must be >= 0");
  if (dropout < 0.0 || dropout >= 1.0) throw DataError("train config: dropout must be in [0,1)");
}

ScorerModel ScorerModel::init(uint64_t seed, double dropout_rate) {
  ScorerModel m;
  m.rng_seed = seed;
  m.dropout_rate = dropout_rate;
  Rng rng = rng_stream(seed, "scorer-init");
  glorot_fill(m.w1, rng);
  glorot_fill(m.w2, rng);
  glorot_fill(m.w3, rng);
  m.dropout_rng = rng_stream(seed, "scorer-dropout");
  return m;
}

double ScorerModel::forward(const FeatureVector& v) const {
  Eigen::VectorXd h1 = ((w1 * to_vec(v)) + b1).cwiseMax(0.0);
  Eigen::VectorXd h2 = ((w2 * h1) + b2).cwiseMax(0.0);
  return sigmoid((w3 * h2)(0) + b3(0));
}

double mlp_forward(ScorerModel& model, const FeatureVector& v, bool training) {
  if (!training || model.dropout_rate <= 0.0) return model.forward(v);
  Eigen::VectorXd m1 = draw_mask(model.dropout_rng, model.b1.size(), model.dropout_rate);
  Eigen::VectorXd m2 = draw_mask(model.dropout_rng, model.b2.size(), model.dropout_rate);
  Eigen::VectorXd h1 =
      ((model.w1 * to_vec(v)) + model.b1).cwiseMax(0.0).cwiseProduct(m1);
  Eigen::VectorXd h2 = ((model.w2 * h1) + model.b2).cwiseMax(0.0).cwiseProduct(m2);
  return sigmoid((model.w3 * h2)(0) + model.b3(0));
}

double rule_score(const FeatureVector& v) { return v.v1 + v.v2 + v.v3 + v.v4 + v.v5; }

std::vector<std::string> mine_hard_negatives(const Query& query, const QrelSet& qrels,
                                             const std::vector<std::string>& bm25_ranking,
                                             int neg_ratio, int num_pos) {
  std::vector<std::string> out;
  if (neg_ratio <= 0 || num_pos <= 0) return out;
  const size_t want = static_cast<size_t>(neg_ratio) * static_cast<size_t>(num_pos);
  for (const auto& doc_id : bm25_ranking) {
    if (qrels.is_positive(query.id, doc_id)) continue;
    out.push_back(doc_id);
    if (out.size() == want) break;
  }
  return out;
}

int ScorerModel::num_params() const {
  return static_cast<int>(w1.size() + b1.size() + w2.size() + b2.size() + w3.size() +
                          b3.size());
}

Eigen::VectorXd ScorerModel::flatten() const {
  Eigen::VectorXd out(num_params());
  Eigen::Index at = 0;
  auto put_matrix = [&](const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) out(at++) = m(r, c);
    }
  };
  auto put_vector = [&](const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out(at++) = v(i);
  };
  put_matrix(w1);
  put_vector(b1);
  put_matrix(w2);
  put_vector(b2);
  put_matrix(w3);
  put_vector(b3);
  return out;
}

void ScorerModel::unflatten(const Eigen::VectorXd& params) {
  Eigen::Index at = 0;
  auto take_matrix = [&](Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = params(at++);
    }
  };
  auto take_vector = [&](Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = params(at++);
  };
  take_matrix(w1);
  take_vector(b1);
  take_matrix(w2);
  take_vector(b2);
  take_matrix(w3);
  take_vector(b3);
}

namespace {

struct BatchTrace {
  Eigen::MatrixXd x, z1, h1, z2, h2;  // h1/h2 are post-mask activations
  Eigen::RowVectorXd z3, p;
};

BatchTrace forward_batch(const ScorerModel& m, const Eigen::MatrixXd& x,
                         const Eigen::MatrixXd* mask1, const Eigen::MatrixXd* mask2) {
  BatchTrace t;
  t.x = x;
  t.z1 = (m.w1 * x).colwise() + m.b1;
  t.h1 = t.z1.cwiseMax(0.0);
  if (mask1 != nullptr) t.h1 = t.h1.cwiseProduct(*mask1);
  t.z2 = (m.w2 * t.h1).colwise() + m.b2;
  t.h2 = t.z2.cwiseMax(0.0);
  if (mask2 != nullptr) t.h2 = t.h2.cwiseProduct(*mask2);
  t.z3 = (m.w3 * t.h2).row(0).array() + m.b3(0);
  t.p = t.z3.unaryExpr([](double z) { return sigmoid(z); });
  return t;
}

double bce_from_probs(const Eigen::RowVectorXd& p, const Eigen::RowVectorXd& y) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pc = std::min(std::max(p(i), kClampLo), kClampHi);
    loss += -(y(i) * std::log(pc) + (1.0 - y(i)) * std::log(1.0 - pc));
  }
  return loss / static_cast<double>(p.size());
}

// Mean-BCE gradient. The p-y shortcut only applies where the clamp is
// inactive; a clamped output has zero gradient, matching what finite
// differences of the clamped loss see.
Eigen::VectorXd backward_batch(const ScorerModel& m, const BatchTrace& t,
                               const Eigen::RowVectorXd& y, const Eigen::MatrixXd* mask1,
                               const Eigen::MatrixXd* mask2) {
  const double batch = static_cast<double>(y.size());
  Eigen::RowVectorXd dz3(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double p = t.p(i);
    dz3(i) = (p < kClampLo || p > kClampHi) ? 0.0 : (p - y(i)) / batch;
  }

  Eigen::MatrixXd gw3 = dz3 * t.h2.transpose();
  const double gb3 = dz3.sum();

  Eigen::MatrixXd dh2 = m.w3.transpose() * dz3;
  if (mask2 != nullptr) dh2 = dh2.cwiseProduct(*mask2);
  Eigen::MatrixXd dz2 =
      dh2.cwiseProduct(t.z2.unaryExpr([](double z) { return z > 0.0 ? 1.0 : 0.0; }));

  Eigen::MatrixXd gw2 = dz2 * t.h1.transpose();
  Eigen::VectorXd gb2 = dz2.rowwise().sum();

  Eigen::MatrixXd dh1 = m.w2.transpose() * dz2;
  if (mask1 != nullptr) dh1 = dh1.cwiseProduct(*mask1);
  Eigen::MatrixXd dz1 =
      dh1.cwiseProduct(t.z1.unaryExpr([](double z) { return z > 0.0 ? 1.0 : 0.0; }));

  Eigen::MatrixXd gw1 = dz1 * t.x.transpose();
  Eigen::VectorXd gb1 = dz1.rowwise().sum();

  ScorerModel grads;
  grads.w1 = gw1;
  grads.b1 = gb1;
  grads.w2 = gw2;
  grads.b2 = gb2;
  grads.w3 = gw3;
  grads.b3 = Eigen::VectorXd::Constant(1, gb3);
  return grads.flatten();
}

Eigen::MatrixXd batch_matrix(const std::vector<TrainExample>& examples,
                             const std::vector<size_t>& order, size_t begin, size_t end) {
  Eigen::MatrixXd x(FeatureVector::kDim, static_cast<Eigen::Index>(end - begin));
  for (size_t i = begin; i < end; ++i) {
    const FeatureVector& v = examples[order[i]].v;
    for (int d = 0; d < FeatureVector::kDim; ++d) {
      x(d, static_cast<Eigen::Index>(i - begin)) = v[d];
    }
  }
  return x;
}

Eigen::RowVectorXd batch_labels(const std::vector<TrainExample>& examples,
                                const std::vector<size_t>& order, size_t begin, size_t end) {
  Eigen::RowVectorXd y(static_cast<Eigen::Index>(end - begin));
  for (size_t i = begin; i < end; ++i) {
    y(static_cast<Eigen::Index>(i - begin)) = examples[order[i]].label;
  }
  return y;
}

Eigen::MatrixXd draw_mask_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                                 double rate) {
  Eigen::MatrixXd m(rows, cols);
  const double keep = 1.0 - rate;
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      m(r, c) = rng.uniform() < rate ? 0.0 : 1.0 / keep;
    }
  }
  return m;
}

}  // namespace

double bce_loss_and_grad(const ScorerModel& model, const std::vector<TrainExample>& batch,
                         Eigen::VectorXd* grad_out) {
  if (batch.empty()) throw DataError("bce_loss_and_grad: empty batch");
  std::vector<size_t> order(batch.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Eigen::MatrixXd x = batch_matrix(batch, order, 0, batch.size());
  Eigen::RowVectorXd y = batch_labels(batch, order, 0, batch.size());
  BatchTrace t = forward_batch(model, x, nullptr, nullptr);
  if (grad_out != nullptr) *grad_out = backward_batch(model, t, y, nullptr, nullptr);
  return bce_from_probs(t.p, y);
}

TrainResult train_scorer(const std::vector<TrainExample>& examples, const TrainConfig& cfg) {
  cfg.validate();
  size_t n_pos = 0, n_neg = 0;
  for (const auto& ex : examples) (ex.label > 0.5 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) {
    throw DataError("train_scorer: need at least one positive and one negative example");
  }

  TrainResult result;
  result.model = ScorerModel::init(cfg.seed, cfg.dropout);
  result.model.trained_with = cfg;
  ScorerModel& model = result.model;

  Rng shuffle_rng = rng_stream(cfg.seed, "scorer-shuffle");
  Rng mask_rng = rng_stream(cfg.seed, "scorer-dropout-train");

  const Eigen::Index n_params = model.num_params();
  Eigen::VectorXd params = model.flatten();
  Eigen::VectorXd adam_m = Eigen::VectorXd::Zero(n_params);
  Eigen::VectorXd adam_v = Eigen::VectorXd::Zero(n_params);
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  long long step = 0;

  std::vector<size_t> order(examples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (size_t begin = 0; begin < examples.size(); begin += static_cast<size_t>(cfg.batch_size)) {
      const size_t end = std::min(examples.size(), begin + static_cast<size_t>(cfg.batch_size));
      const Eigen::Index cols = static_cast<Eigen::Index>(end - begin);
      Eigen::MatrixXd x = batch_matrix(examples, order, begin, end);
      Eigen::RowVectorXd y = batch_labels(examples, order, begin, end);

      const bool use_dropout = cfg.dropout > 0.0;
      Eigen::MatrixXd m1, m2;
      if (use_dropout) {
        m1 = draw_mask_matrix(mask_rng, model.b1.size(), cols, cfg.dropout);
        m2 = draw_mask_matrix(mask_rng, model.b2.size(), cols, cfg.dropout);
      }
      BatchTrace t = forward_batch(model, x, use_dropout ? &m1 : nullptr,
                                   use_dropout ? &m2 : nullptr);
      epoch_loss += bce_from_probs(t.p, y) * static_cast<double>(cols);
      Eigen::VectorXd grad =
          backward_batch(model, t, y, use_dropout ? &m1 : nullptr, use_dropout ? &m2 : nullptr);

      ++step;
      adam_m = beta1 * adam_m + (1.0 - beta1) * grad;
      adam_v = beta2 * adam_v + (1.0 - beta2) * grad.cwiseProduct(grad);
      const double bias1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double bias2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (Eigen::Index i = 0; i < n_params; ++i) {
        const double mhat = adam_m(i) / bias1;
        const double vhat = adam_v(i) / bias2;
        params(i) -= cfg.learning_rate * mhat / (std::sqrt(vhat) + adam_eps);
      }
      model.unflatten(params);
    }
    result.loss_curve.push_back(epoch_loss / static_cast<double>(examples.size()));
  }
  return result;
}

std::string ScorerModel::to_json_string() const {
  json j;
  j["layer_sizes"] = kLayerSizes;
  j["feature_order"] = FeatureVector::names();
  j["activation"] = {{"hidden", "relu"}, {"output", "sigmoid"}};
  j["dropout_rate"] = dropout_rate;
  j["seed"] = rng_seed;
  j["train_config"] = {{"learning_rate", trained_with.learning_rate},
                       {"batch_size", trained_with.batch_size},
                       {"epochs", trained_with.epochs},
                       {"neg_ratio", trained_with.neg_ratio},
                       {"dropout", trained_with.dropout},
                       {"seed", trained_with.seed}};
  j["w1"] = matrix_to_json(w1);
  j["b1"] = vector_to_json(b1);
  j["w2"] = matrix_to_json(w2);
  j["b2"] = vector_to_json(b2);
  j["w3"] = matrix_to_json(w3);
  j["b3"] = vector_to_json(b3);
  return j.dump();
}

ScorerModel ScorerModel::from_json_string(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw DataError("malformed scorer JSON");
  const auto sizes = j.at("layer_sizes").get<std::vector<int>>();
  const std::vector<int> expected(kLayerSizes.begin(), kLayerSizes.end());
  if (sizes != expected) throw DataError("scorer JSON: unexpected layer sizes");
  const auto order = j.at("feature_order").get<std::vector<std::string>>();
  const auto& names = FeatureVector::names();
  if (!std::equal(order.begin(), order.end(), names.begin(), names.end())) {
    throw DataError("scorer JSON: feature order mismatch");
  }
  ScorerModel m;
  m.dropout_rate = j.at("dropout_rate").get<double>();
  m.rng_seed = j.at("seed").get<uint64_t>();
  if (auto it = j.find("train_config"); it != j.end() && it->is_object()) {
    m.trained_with.learning_rate = it->value("learning_rate", m.trained_with.learning_rate);
    m.trained_with.batch_size = it->value("batch_size", m.trained_with.batch_size);
    m.trained_with.epochs = it->value("epochs", m.trained_with.epochs);
    m.trained_with.neg_ratio = it->value("neg_ratio", m.trained_with.neg_ratio);
    m.trained_with.dropout = it->value("dropout", m.trained_with.dropout);
    m.trained_with.seed = it->value("seed", m.trained_with.seed);
  }
  m.w1 = matrix_from_json(j.at("w1"), 64, FeatureVector::kDim, "w1");
  m.b1 = vector_from_json(j.at("b1"), 64, "b1");
  m.w2 = matrix_from_json(j.at("w2"), 32, 64, "w2");
  m.b2 = vector_from_json(j.at("b2"), 32, "b2");
  m.w3 = matrix_from_json(j.at("w3"), 1, 32, "w3");
  m.b3 = vector_from_json(j.at("b3"), 1, "b3");
  m.dropout_rng = rng_stream(m.rng_seed, "scorer-dropout");
  return m;
}

void ScorerModel::save(const std::string& path) const {
  write_file_atomic(path, to_json_string());
}

ScorerModel ScorerModel::load(const std::string& path) {
  return from_json_string(read_file(path));
}

}  // namespace juris
