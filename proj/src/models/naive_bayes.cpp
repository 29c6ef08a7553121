#include "mia/models/naive_bayes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mia {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;

std::vector<double> normalize_log(std::vector<double> logp) {
  const double mx = *std::max_element(logp.begin(), logp.end());
  double sum = 0.0;
  for (double& v : logp) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : logp) v /= sum;
  return logp;
}
}  // namespace

std::unique_ptr<NaiveBayesModel> NaiveBayesModel::fit(
    const ModelSpec& spec, const EncodedMatrix& train,
    const std::vector<ColumnExpansion>& expansions, int n_classes) {
  const double var_smoothing = spec.num("var_smoothing", 1e-9);
  int observed = 0;
  for (int y : train.y)
    if (y == train.y.front()) ++observed;
  if (observed == static_cast<int>(train.y.size()))
    throw std::runtime_error("single-class training data");

  auto m = std::make_unique<NaiveBayesModel>();
  m->n_classes_ = n_classes;
  const double n = static_cast<double>(train.n_rows);

  std::vector<double> class_count(n_classes, 0.0);
  for (int y : train.y) class_count[y] += 1.0;
  m->log_prior_.resize(n_classes);
  for (int k = 0; k < n_classes; ++k)
    m->log_prior_[k] = std::log(std::max(class_count[k], kProbFloor) / n);

  // Largest per-feature variance, for the relative smoothing term.
  double max_var = 0.0;
  for (const ColumnExpansion& exp : expansions) {
    if (exp.one_hot) continue;
    double sum = 0.0, sq = 0.0;
    for (std::size_t r = 0; r < train.n_rows; ++r) {
      const double v = train.x[r * train.n_cols + exp.out_start];
      sum += v;
      sq += v * v;
    }
    max_var = std::max(max_var, sq / n - (sum / n) * (sum / n));
  }
  const double eps = var_smoothing * std::max(max_var, 1.0);

  for (const ColumnExpansion& exp : expansions) {
    if (exp.one_hot) {
      BlockFeature b;
      b.start = exp.out_start;
      b.len = exp.out_len;
      b.log_prob.assign(static_cast<std::size_t>(n_classes) * exp.out_len, 0.0);
      b.log_unseen.resize(n_classes);
      std::vector<double> counts(static_cast<std::size_t>(n_classes) * exp.out_len, 0.0);
      for (std::size_t r = 0; r < train.n_rows; ++r) {
        const int y = train.y[r];
        for (std::size_t c = 0; c < exp.out_len; ++c)
          if (train.x[r * train.n_cols + exp.out_start + c] > 0.5)
            counts[static_cast<std::size_t>(y) * exp.out_len + c] += 1.0;
      }
      for (int k = 0; k < n_classes; ++k) {
        const double denom = class_count[k] + static_cast<double>(exp.out_len);  // Laplace
        for (std::size_t c = 0; c < exp.out_len; ++c) {
          const double p = (counts[static_cast<std::size_t>(k) * exp.out_len + c] + 1.0) / denom;
          b.log_prob[static_cast<std::size_t>(k) * exp.out_len + c] = std::log(p);
        }
        b.log_unseen[k] = std::log(1.0 / denom);
      }
      m->blocks_.push_back(std::move(b));
    } else {
      NumericFeature f;
      f.col = exp.out_start;
      f.mean.resize(n_classes);
      f.var.resize(n_classes);
      std::vector<double> sum(n_classes, 0.0), sq(n_classes, 0.0);
      for (std::size_t r = 0; r < train.n_rows; ++r) {
        const double v = train.x[r * train.n_cols + exp.out_start];
        sum[train.y[r]] += v;
        sq[train.y[r]] += v * v;
      }
      for (int k = 0; k < n_classes; ++k) {
        const double ck = std::max(class_count[k], 1.0);
        f.mean[k] = sum[k] / ck;
        f.var[k] = std::max(sq[k] / ck - f.mean[k] * f.mean[k], 0.0) + eps;
        f.var[k] = std::max(f.var[k], 1e-12);
      }
      m->numeric_.push_back(std::move(f));
    }
  }
  return m;
}

std::vector<double> NaiveBayesModel::predict_proba(std::span<const double> x) const {
  std::vector<double> logp = log_prior_;
  for (const NumericFeature& f : numeric_) {
    const double v = x[f.col];
    for (int k = 0; k < n_classes_; ++k) {
      const double d = v - f.mean[k];
      logp[k] -= 0.5 * (kLog2Pi + std::log(f.var[k]) + d * d / f.var[k]);
    }
  }
  for (const BlockFeature& b : blocks_) {
    int active = -1;
    for (std::size_t c = 0; c < b.len; ++c)
      if (x[b.start + c] > 0.5) active = static_cast<int>(c);
    for (int k = 0; k < n_classes_; ++k)
      logp[k] += active >= 0 ? b.log_prob[static_cast<std::size_t>(k) * b.len + active]
                             : b.log_unseen[k];
  }
  return normalize_log(std::move(logp));
}

nlohmann::json NaiveBayesModel::to_json() const {
  nlohmann::json numeric = nlohmann::json::array();
  for (const NumericFeature& f : numeric_)
    numeric.push_back({{"col", f.col}, {"mean", f.mean}, {"var", f.var}});
  nlohmann::json blocks = nlohmann::json::array();
  for (const BlockFeature& b : blocks_)
    blocks.push_back({{"start", b.start},
                      {"len", b.len},
                      {"log_prob", b.log_prob},
                      {"log_unseen", b.log_unseen}});
  return {{"type", "naive_bayes"},
          {"n_classes", n_classes_},
          {"log_prior", log_prior_},
          {"numeric", numeric},
          {"blocks", blocks}};
}

std::unique_ptr<NaiveBayesModel> NaiveBayesModel::from_json(const nlohmann::json& j) {
  auto m = std::make_unique<NaiveBayesModel>();
  m->n_classes_ = j.at("n_classes").get<int>();
  m->log_prior_ = j.at("log_prior").get<std::vector<double>>();
  for (const auto& fj : j.at("numeric")) {
    NumericFeature f;
    f.col = fj.at("col").get<std::size_t>();
    f.mean = fj.at("mean").get<std::vector<double>>();
    f.var = fj.at("var").get<std::vector<double>>();
    m->numeric_.push_back(std::move(f));
  }
  for (const auto& bj : j.at("blocks")) {
    BlockFeature b;
    b.start = bj.at("start").get<std::size_t>();
    b.len = bj.at("len").get<std::size_t>();
    b.log_prob = bj.at("log_prob").get<std::vector<double>>();
    b.log_unseen = bj.at("log_unseen").get<std::vector<double>>();
    m->blocks_.push_back(std::move(b));
  }
  return m;
}

}  // namespace mia
