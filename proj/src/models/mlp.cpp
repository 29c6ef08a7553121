#include "mia/models/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mia/rng.hpp"

namespace mia {

MlpModel::Params MlpModel::params_from_spec(const ModelSpec& spec) {
  Params p;
  p.hidden = static_cast<std::size_t>(spec.num("hidden", 128));
  p.epochs = static_cast<std::size_t>(spec.num("epochs", 200));
  p.batch = static_cast<std::size_t>(spec.num("batch", 200));
  p.lr = spec.num("lr", spec.defended ? 0.0001 : 0.001);
  p.weight_decay = spec.num("weight_decay", 1e-7);
  p.step_size = static_cast<std::size_t>(spec.num("step_size", 50));
  p.step_gamma = spec.num("step_gamma", 0.1);
  p.dropout = spec.num("dropout", spec.defended ? 0.5 : 0.0);
  return p;
}

std::unique_ptr<MlpModel> MlpModel::make(const Params& params, std::size_t n_features,
                                         int n_classes, std::uint64_t seed) {
  auto m = std::make_unique<MlpModel>();
  m->params_ = params;
  m->n_features_ = n_features;
  m->n_classes_ = n_classes;
  m->w1_.resize(params.hidden * n_features);
  m->b1_.resize(params.hidden);
  m->w2_.resize(static_cast<std::size_t>(n_classes) * params.hidden);
  m->b2_.resize(n_classes);

  // fan-in scaled uniform init
  Rng rng(derive_seed(seed, 0xA11C));
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(n_features, 1)));
  for (double& v : m->w1_) v = rng.next_uniform(-bound1, bound1);
  for (double& v : m->b1_) v = rng.next_uniform(-bound1, bound1);
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(params.hidden));
  for (double& v : m->w2_) v = rng.next_uniform(-bound2, bound2);
  for (double& v : m->b2_) v = rng.next_uniform(-bound2, bound2);
  return m;
}

std::unique_ptr<MlpModel> MlpModel::fit(const ModelSpec& spec, const EncodedMatrix& train,
                                        int n_classes) {
  auto m = make(params_from_spec(spec), train.n_cols, n_classes, spec.seed);
  m->train_epochs(train, m->params_.epochs, derive_seed(spec.seed, 0x7247));
  return m;
}

void MlpModel::forward(std::span<const double> x, double* hidden_out, double* logits,
                       const std::vector<std::uint8_t>* drop_mask) const {
  const std::size_t h = params_.hidden;
  for (std::size_t j = 0; j < h; ++j) {
    double z = b1_[j];
    const double* w = w1_.data() + j * n_features_;
    for (std::size_t f = 0; f < n_features_; ++f) z += w[f] * x[f];
    z = z > 0.0 ? z : 0.0;
    if (drop_mask) z = (*drop_mask)[j] ? 0.0 : z / (1.0 - params_.dropout);
    hidden_out[j] = z;
  }
  for (int k = 0; k < n_classes_; ++k) {
    double z = b2_[k];
    const double* w = w2_.data() + static_cast<std::size_t>(k) * h;
    for (std::size_t j = 0; j < h; ++j) z += w[j] * hidden_out[j];
    logits[k] = z;
  }
}

namespace {
void softmax_inplace(double* z, int n) {
  double mx = z[0];
  for (int k = 1; k < n; ++k) mx = std::max(mx, z[k]);
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    z[k] = std::exp(z[k] - mx);
    sum += z[k];
  }
  for (int k = 0; k < n; ++k) z[k] /= sum;
}
}  // namespace

void MlpModel::train_epochs(const EncodedMatrix& data, std::size_t epochs, std::uint64_t seed) {
  if (data.n_rows == 0) throw std::runtime_error("mlp fit on empty data");
  const std::size_t h = params_.hidden;
  const std::size_t n_params = w1_.size() + b1_.size() + w2_.size() + b2_.size();

  // Adam state is local to this call (a federated local update starts fresh).
  std::vector<double> m_t(n_params, 0.0), v_t(n_params, 0.0);
  double beta1_pow = 1.0, beta2_pow = 1.0;
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  std::vector<double> grad(n_params);
  std::vector<double> hidden(h), logits(n_classes_);
  std::vector<std::uint8_t> drop_mask(h, 0);
  std::vector<std::size_t> order(data.n_rows);
  std::iota(order.begin(), order.end(), 0);

  Rng rng(seed);
  double* gw1 = grad.data();
  double* gb1 = gw1 + w1_.size();
  double* gw2 = gb1 + b1_.size();
  double* gb2 = gw2 + w2_.size();

  for (std::size_t e = 0; e < epochs; ++e) {
    const std::size_t epoch_idx = epochs_done_ + e;
    double lr = params_.lr;
    if (params_.step_size > 0)
      lr *= std::pow(params_.step_gamma, std::floor(static_cast<double>(epoch_idx) /
                                                    static_cast<double>(params_.step_size)));
    Rng epoch_rng = rng.derive(epoch_idx);
    epoch_rng.shuffle(order);
    Rng drop_rng = epoch_rng.derive(1);

    for (std::size_t start = 0; start < data.n_rows; start += params_.batch) {
      const std::size_t stop = std::min(start + params_.batch, data.n_rows);
      const double bsz = static_cast<double>(stop - start);
      std::fill(grad.begin(), grad.end(), 0.0);

      for (std::size_t bi = start; bi < stop; ++bi) {
        const std::size_t r = order[bi];
        std::span<const double> x(data.x.data() + r * data.n_cols, data.n_cols);
        const std::vector<std::uint8_t>* mask = nullptr;
        if (params_.dropout > 0.0) {
          for (std::size_t j = 0; j < h; ++j)
            drop_mask[j] = drop_rng.next_double() < params_.dropout ? 1 : 0;
          mask = &drop_mask;
        }
        forward(x, hidden.data(), logits.data(), mask);
        softmax_inplace(logits.data(), n_classes_);
        logits[data.y[r]] -= 1.0;  // dL/dlogits

        for (int k = 0; k < n_classes_; ++k) {
          const double gk = logits[k] / bsz;
          if (gk == 0.0) continue;
          gb2[k] += gk;
          double* g = gw2 + static_cast<std::size_t>(k) * h;
          for (std::size_t j = 0; j < h; ++j) g[j] += gk * hidden[j];
        }
        for (std::size_t j = 0; j < h; ++j) {
          if (hidden[j] <= 0.0) continue;  // ReLU (and dropout) gate
          double gh = 0.0;
          for (int k = 0; k < n_classes_; ++k)
            gh += logits[k] * w2_[static_cast<std::size_t>(k) * h + j];
          gh /= bsz;
          if (params_.dropout > 0.0) gh /= (1.0 - params_.dropout);
          gb1[j] += gh;
          double* g = gw1 + j * n_features_;
          for (std::size_t f = 0; f < n_features_; ++f) g[f] += gh * x[f];
        }
      }

      // Adam step over the flat parameter vector, weight decay added to grads
      beta1_pow *= beta1;
      beta2_pow *= beta2;
      auto adam_update = [&](double* w, const double* g, std::size_t len, std::size_t off) {
        for (std::size_t i = 0; i < len; ++i) {
          const double gi = g[i] + params_.weight_decay * w[i];
          double& mi = m_t[off + i];
          double& vi = v_t[off + i];
          mi = beta1 * mi + (1.0 - beta1) * gi;
          vi = beta2 * vi + (1.0 - beta2) * gi * gi;
          const double mhat = mi / (1.0 - beta1_pow);
          const double vhat = vi / (1.0 - beta2_pow);
          w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
      };
      std::size_t off = 0;
      adam_update(w1_.data(), gw1, w1_.size(), off);
      off += w1_.size();
      adam_update(b1_.data(), gb1, b1_.size(), off);
      off += b1_.size();
      adam_update(w2_.data(), gw2, w2_.size(), off);
      off += w2_.size();
      adam_update(b2_.data(), gb2, b2_.size(), off);
    }
  }
  epochs_done_ += epochs;
}

std::vector<double> MlpModel::predict_proba(std::span<const double> x) const {
  std::vector<double> hidden(params_.hidden), logits(n_classes_);
  forward(x, hidden.data(), logits.data(), nullptr);
  softmax_inplace(logits.data(), n_classes_);
  return logits;
}

double MlpModel::loss(const EncodedMatrix& data) const {
  std::vector<double> hidden(params_.hidden), logits(n_classes_);
  double total = 0.0;
  for (std::size_t r = 0; r < data.n_rows; ++r) {
    forward({data.x.data() + r * data.n_cols, data.n_cols}, hidden.data(), logits.data(), nullptr);
    softmax_inplace(logits.data(), n_classes_);
    total -= std::log(std::max(logits[data.y[r]], kProbFloor));
  }
  return total / static_cast<double>(data.n_rows);
}

std::vector<double> MlpModel::loss_grad(const EncodedMatrix& data) const {
  const std::size_t h = params_.hidden;
  std::vector<double> grad(w1_.size() + b1_.size() + w2_.size() + b2_.size(), 0.0);
  double* gw1 = grad.data();
  double* gb1 = gw1 + w1_.size();
  double* gw2 = gb1 + b1_.size();
  double* gb2 = gw2 + w2_.size();
  std::vector<double> hidden(h), logits(n_classes_);
  const double n = static_cast<double>(data.n_rows);
  for (std::size_t r = 0; r < data.n_rows; ++r) {
    std::span<const double> x(data.x.data() + r * data.n_cols, data.n_cols);
    forward(x, hidden.data(), logits.data(), nullptr);
    softmax_inplace(logits.data(), n_classes_);
    logits[data.y[r]] -= 1.0;
    for (int k = 0; k < n_classes_; ++k) {
      const double gk = logits[k] / n;
      gb2[k] += gk;
      double* g = gw2 + static_cast<std::size_t>(k) * h;
      for (std::size_t j = 0; j < h; ++j) g[j] += gk * hidden[j];
    }
    for (std::size_t j = 0; j < h; ++j) {
      if (hidden[j] <= 0.0) continue;
      double gh = 0.0;
      for (int k = 0; k < n_classes_; ++k)
        gh += logits[k] * w2_[static_cast<std::size_t>(k) * h + j];
      gh /= n;
      gb1[j] += gh;
      double* g = gw1 + j * n_features_;
      for (std::size_t f = 0; f < n_features_; ++f) g[f] += gh * x[f];
    }
  }
  return grad;
}

std::vector<double> MlpModel::parameters() const {
  std::vector<double> out;
  out.reserve(w1_.size() + b1_.size() + w2_.size() + b2_.size());
  out.insert(out.end(), w1_.begin(), w1_.end());
  out.insert(out.end(), b1_.begin(), b1_.end());
  out.insert(out.end(), w2_.begin(), w2_.end());
  out.insert(out.end(), b2_.begin(), b2_.end());
  return out;
}

void MlpModel::set_parameters(std::span<const double> params) {
  const std::size_t total = w1_.size() + b1_.size() + w2_.size() + b2_.size();
  if (params.size() != total) throw std::runtime_error("parameter shape mismatch");
  std::size_t off = 0;
  std::copy_n(params.begin() + off, w1_.size(), w1_.begin());
  off += w1_.size();
  std::copy_n(params.begin() + off, b1_.size(), b1_.begin());
  off += b1_.size();
  std::copy_n(params.begin() + off, w2_.size(), w2_.begin());
  off += w2_.size();
  std::copy_n(params.begin() + off, b2_.size(), b2_.begin());
}

nlohmann::json MlpModel::to_json() const {
  return {{"type", "mlp"},
          {"n_classes", n_classes_},
          {"n_features", n_features_},
          {"hidden", params_.hidden},
          {"dropout", params_.dropout},
          {"lr", params_.lr},
          {"weight_decay", params_.weight_decay},
          {"step_size", params_.step_size},
          {"step_gamma", params_.step_gamma},
          {"batch", params_.batch},
          {"epochs_done", epochs_done_},
          {"w1", w1_},
          {"b1", b1_},
          {"w2", w2_},
          {"b2", b2_}};
}

std::unique_ptr<MlpModel> MlpModel::from_json(const nlohmann::json& j) {
  auto m = std::make_unique<MlpModel>();
  m->n_classes_ = j.at("n_classes").get<int>();
  m->n_features_ = j.at("n_features").get<std::size_t>();
  m->params_.hidden = j.at("hidden").get<std::size_t>();
  m->params_.dropout = j.at("dropout").get<double>();
  m->params_.lr = j.at("lr").get<double>();
  m->params_.weight_decay = j.at("weight_decay").get<double>();
  m->params_.step_size = j.at("step_size").get<std::size_t>();
  m->params_.step_gamma = j.at("step_gamma").get<double>();
  m->params_.batch = j.at("batch").get<std::size_t>();
  m->epochs_done_ = j.at("epochs_done").get<std::size_t>();
  m->w1_ = j.at("w1").get<std::vector<double>>();
  m->b1_ = j.at("b1").get<std::vector<double>>();
  m->w2_ = j.at("w2").get<std::vector<double>>();
  m->b2_ = j.at("b2").get<std::vector<double>>();
  return m;
}

}  // namespace mia
