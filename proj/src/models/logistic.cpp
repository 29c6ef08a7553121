#include "mia/models/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mia {

std::unique_ptr<LogisticModel> LogisticModel::make(const ModelSpec& spec, std::size_t n_features,
                                                   int n_classes) {
  auto m = std::make_unique<LogisticModel>();
  m->n_classes_ = n_classes;
  m->n_features_ = n_features;
  m->w_.assign(static_cast<std::size_t>(n_classes) * (n_features + 1), 0.0);
  m->tol_ = spec.num("tol", 1e-4);

  const std::string penalty = spec.str("penalty", "None");
  const double c_value = spec.num("C", 0.0);
  if (penalty != "None" && penalty != "none" && c_value > 0.0) {
    const double strength = 1.0 / c_value;  // scaled by 1/n at use sites
    if (penalty == "l2") {
      m->lambda_l2_ = strength;
    } else if (penalty == "elasticnet") {
      const double ratio = spec.num("l1_ratio", 0.5);
      m->lambda_l1_ = ratio * strength;
      m->lambda_l2_ = (1.0 - ratio) * strength;
    } else if (penalty == "l1") {
      m->lambda_l1_ = strength;
    } else {
      throw std::runtime_error("unknown penalty: " + penalty);
    }
  }
  return m;
}

std::unique_ptr<LogisticModel> LogisticModel::fit(const ModelSpec& spec,
                                                  const EncodedMatrix& train, int n_classes) {
  auto m = make(spec, train.n_cols, n_classes);
  const std::size_t max_iter = static_cast<std::size_t>(spec.num("max_iter", 500));
  m->train_epochs(train, max_iter, 0);
  return m;
}

void LogisticModel::set_parameters(std::span<const double> params) {
  if (params.size() != w_.size()) throw std::runtime_error("parameter shape mismatch");
  w_.assign(params.begin(), params.end());
  converged_ = false;
}

void LogisticModel::softmax_row(std::span<const double> x, double* p) const {
  const std::size_t stride = n_features_ + 1;
  double mx = -1e300;
  for (int k = 0; k < n_classes_; ++k) {
    const double* wk = w_.data() + static_cast<std::size_t>(k) * stride;
    double z = wk[n_features_];
    for (std::size_t f = 0; f < n_features_; ++f) z += wk[f] * x[f];
    p[k] = z;
    mx = std::max(mx, z);
  }
  double sum = 0.0;
  for (int k = 0; k < n_classes_; ++k) {
    p[k] = std::exp(p[k] - mx);
    sum += p[k];
  }
  for (int k = 0; k < n_classes_; ++k) p[k] /= sum;
}

void LogisticModel::train_epochs(const EncodedMatrix& data, std::size_t epochs,
                                 std::uint64_t /*seed*/) {
  if (data.n_rows == 0) throw std::runtime_error("logistic regression fit on empty data");
  const std::size_t stride = n_features_ + 1;
  const double n = static_cast<double>(data.n_rows);
  const double l1 = lambda_l1_ / n;
  const double l2 = lambda_l2_ / n;

  // Softmax cross-entropy smoothness: L <= 0.5 * max_i ||x_i||^2 (bias incl.)
  double max_sq = 0.0;
  for (std::size_t r = 0; r < data.n_rows; ++r) {
    double s = 1.0;
    for (std::size_t f = 0; f < data.n_cols; ++f) {
      const double v = data.x[r * data.n_cols + f];
      s += v * v;
    }
    max_sq = std::max(max_sq, s);
  }
  const double lr = 1.0 / (0.5 * max_sq + l2 + 1e-12);

  std::vector<double> grad(w_.size());
  std::vector<double> p(n_classes_);
  for (std::size_t it = 0; it < epochs; ++it) {
    if (converged_) return;
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t r = 0; r < data.n_rows; ++r) {
      std::span<const double> x(data.x.data() + r * data.n_cols, data.n_cols);
      softmax_row(x, p.data());
      p[data.y[r]] -= 1.0;
      for (int k = 0; k < n_classes_; ++k) {
        const double gk = p[k] / n;
        if (gk == 0.0) continue;
        double* gw = grad.data() + static_cast<std::size_t>(k) * stride;
        for (std::size_t f = 0; f < n_features_; ++f) gw[f] += gk * x[f];
        gw[n_features_] += gk;
      }
    }
    double gmax = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) {
      const bool is_bias = (i % stride) == n_features_;
      grad[i] += is_bias ? 0.0 : l2 * w_[i];
      gmax = std::max(gmax, std::abs(grad[i]));
    }
    // Convergence is checked before the step so that resuming a converged
    // model (e.g. a federated round) leaves the parameters untouched.
    if (gmax < tol_) {
      converged_ = true;
      return;
    }
    for (std::size_t i = 0; i < w_.size(); ++i) {
      const bool is_bias = (i % stride) == n_features_;
      double v = w_[i] - lr * grad[i];
      if (l1 > 0.0 && !is_bias) {
        const double shrink = lr * l1;
        v = v > shrink ? v - shrink : (v < -shrink ? v + shrink : 0.0);
      }
      w_[i] = v;
    }
  }
}

double LogisticModel::train_loss(const EncodedMatrix& data) const {
  std::vector<double> p(n_classes_);
  double loss = 0.0;
  for (std::size_t r = 0; r < data.n_rows; ++r) {
    softmax_row({data.x.data() + r * data.n_cols, data.n_cols}, p.data());
    loss -= std::log(std::max(p[data.y[r]], kProbFloor));
  }
  return loss / static_cast<double>(data.n_rows);
}

std::vector<double> LogisticModel::predict_proba(std::span<const double> x) const {
  std::vector<double> p(n_classes_);
  softmax_row(x, p.data());
  return p;
}

nlohmann::json LogisticModel::to_json() const {
  return {{"type", "logistic_regression"},
          {"n_classes", n_classes_},
          {"n_features", n_features_},
          {"w", w_},
          {"lambda_l1", lambda_l1_},
          {"lambda_l2", lambda_l2_},
          {"tol", tol_}};
}

std::unique_ptr<LogisticModel> LogisticModel::from_json(const nlohmann::json& j) {
  auto m = std::make_unique<LogisticModel>();
  m->n_classes_ = j.at("n_classes").get<int>();
  m->n_features_ = j.at("n_features").get<std::size_t>();
  m->w_ = j.at("w").get<std::vector<double>>();
  m->lambda_l1_ = j.at("lambda_l1").get<double>();
  m->lambda_l2_ = j.at("lambda_l2").get<double>();
  m->tol_ = j.at("tol").get<double>();
  return m;
}

}  // namespace mia
