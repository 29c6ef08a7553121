#pragma once

#include "mia/model.hpp"

namespace mia {

// Multinomial logistic regression, full-batch gradient descent with a step
// size bounded by the softmax-loss smoothness constant, proximal step for the
// L1 part of elasticnet. All solver names from the grid map to this optimizer.
class LogisticModel : public ParametricModel {
 public:
  static std::unique_ptr<LogisticModel> fit(const ModelSpec& spec, const EncodedMatrix& train,
                                            int n_classes);
  // Fresh zero-initialized model; the federated loop drives training itself.
  static std::unique_ptr<LogisticModel> make(const ModelSpec& spec, std::size_t n_features,
                                             int n_classes);

  std::vector<double> predict_proba(std::span<const double> x) const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<LogisticModel> from_json(const nlohmann::json& j);

  std::vector<double> parameters() const override { return w_; }
  void set_parameters(std::span<const double> params) override;
  void train_epochs(const EncodedMatrix& data, std::size_t epochs, std::uint64_t seed) override;

  // Mean cross-entropy on the data, before regularization.
  double train_loss(const EncodedMatrix& data) const;

 private:
  std::size_t n_features_ = 0;
  std::vector<double> w_;  // class-major, (n_features + 1) per class, bias last
  double lambda_l1_ = 0.0;
  double lambda_l2_ = 0.0;
  double tol_ = 1e-4;
  bool converged_ = false;

  void softmax_row(std::span<const double> x, double* p) const;
};

}  // namespace mia
