#pragma once

#include "mia/model.hpp"

namespace mia {

// One hidden layer of 128 ReLU units by default, Adam with weight decay and
// step learning-rate decay, cross-entropy loss, mini-batch training. The
// defended variant adds dropout after the hidden layer and a smaller rate.
class MlpModel : public ParametricModel {
 public:
  struct Params {
    std::size_t hidden = 128;
    std::size_t epochs = 200;
    std::size_t batch = 200;
    double lr = 0.001;
    double weight_decay = 1e-7;
    std::size_t step_size = 50;   // scheduler step (epochs)
    double step_gamma = 0.1;
    double dropout = 0.0;
  };
  static Params params_from_spec(const ModelSpec& spec);

  static std::unique_ptr<MlpModel> fit(const ModelSpec& spec, const EncodedMatrix& train,
                                       int n_classes);
  static std::unique_ptr<MlpModel> make(const Params& params, std::size_t n_features,
                                        int n_classes, std::uint64_t seed);

  std::vector<double> predict_proba(std::span<const double> x) const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<MlpModel> from_json(const nlohmann::json& j);

  std::vector<double> parameters() const override;
  void set_parameters(std::span<const double> params) override;
  void train_epochs(const EncodedMatrix& data, std::size_t epochs, std::uint64_t seed) override;

  // Mean cross-entropy (no weight decay, no dropout) and its analytic
  // gradient in flat parameter order; used by the finite-difference check.
  double loss(const EncodedMatrix& data) const;
  std::vector<double> loss_grad(const EncodedMatrix& data) const;

 private:
  Params params_;
  std::size_t n_features_ = 0;
  std::vector<double> w1_;  // hidden x features
  std::vector<double> b1_;
  std::vector<double> w2_;  // classes x hidden
  std::vector<double> b2_;
  std::size_t epochs_done_ = 0;

  struct AdamState;
  void forward(std::span<const double> x, double* hidden_out, double* logits,
               const std::vector<std::uint8_t>* drop_mask) const;
};

}  // namespace mia
