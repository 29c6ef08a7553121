#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mia/dataset.hpp"
#include "mia/encode.hpp"

namespace mia {

enum class ModelKind {
  naive_bayes,
  logistic_regression,
  decision_tree,
  random_forest,
  gradient_boosted_trees,
  mlp,
};

std::string kind_name(ModelKind k);
ModelKind kind_from_name(const std::string& name);

struct ModelSpec {
  ModelKind kind = ModelKind::naive_bayes;
  nlohmann::json hyper = nlohmann::json::object();
  bool defended = false;
  std::uint64_t seed = 0;

  double num(const std::string& name, double fallback) const;
  std::string str(const std::string& name, const std::string& fallback) const;
};

// Throws on hyperparameter names outside the kind's grid vocabulary.
void validate_spec(const ModelSpec& spec);

inline int argmax_class(std::span<const double> p) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(p.size()); ++i)
    if (p[i] > p[best]) best = i;  // strict: ties break to the lowest index
  return best;
}

// Probability floor applied before any log of a model output.
inline constexpr double kProbFloor = 1e-12;

class Model {
 public:
  virtual ~Model() = default;
  virtual std::vector<double> predict_proba(std::span<const double> x) const = 0;
  virtual nlohmann::json to_json() const = 0;
  int n_classes() const { return n_classes_; }

 protected:
  int n_classes_ = 0;
};

// Models whose parameters are a flat real vector; the federated simulator
// averages these.
class ParametricModel : public Model {
 public:
  virtual std::vector<double> parameters() const = 0;
  virtual void set_parameters(std::span<const double> params) = 0;
  // Runs `epochs` further optimizer passes over the given data.
  virtual void train_epochs(const EncodedMatrix& data, std::size_t epochs, std::uint64_t seed) = 0;
};

std::unique_ptr<Model> fit_model(const ModelSpec& spec, const EncodedMatrix& train,
                                 const std::vector<ColumnExpansion>& expansions, int n_classes,
                                 const EncodedMatrix* validation = nullptr);

std::unique_ptr<Model> model_from_json(const nlohmann::json& j);

// Black-box handle: raw rows in, probability vectors out. Immutable and safe
// to share across threads.
class TrainedModel {
 public:
  TrainedModel() = default;
  TrainedModel(ModelSpec spec, std::shared_ptr<const Encoder> encoder,
               std::shared_ptr<const Model> model)
      : spec_(std::move(spec)), encoder_(std::move(encoder)), model_(std::move(model)) {}

  std::vector<double> predict_row(const Dataset& d, std::size_t row) const {
    return model_->predict_proba(encoder_->encode_row(d, row));
  }
  std::vector<double> predict_encoded(std::span<const double> x) const {
    return model_->predict_proba(x);
  }
  int predict_label(const Dataset& d, std::size_t row) const {
    auto p = predict_row(d, row);
    return argmax_class(p);
  }
  int n_classes() const { return model_->n_classes(); }
  const ModelSpec& spec() const { return spec_; }
  const Encoder& encoder() const { return *encoder_; }
  bool valid() const { return model_ != nullptr; }

  void save(const std::string& path) const;
  static TrainedModel load(const std::string& path);
  nlohmann::json to_json() const;
  static TrainedModel from_json(const nlohmann::json& j);

 private:
  ModelSpec spec_;
  std::shared_ptr<const Encoder> encoder_;
  std::shared_ptr<const Model> model_;

  friend TrainedModel wrap_model(ModelSpec, std::shared_ptr<const Encoder>,
                                 std::shared_ptr<const Model>);
};

// Fits the kind-specific model on the given rows; the encoder is fitted on
// the same rows (adversary pipelines never see target statistics).
TrainedModel train_model(const ModelSpec& spec, const Dataset& d,
                         std::span<const std::size_t> train_rows,
                         const EncodedMatrix* validation = nullptr);

struct GeneralizationReport {
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double gap = 0.0;
};

GeneralizationReport generalization_gap(const TrainedModel& m, const Dataset& d,
                                        std::span<const std::size_t> train_rows,
                                        std::span<const std::size_t> test_rows);

double accuracy(const TrainedModel& m, const Dataset& d, std::span<const std::size_t> rows);
double accuracy(const Model& m, const EncodedMatrix& data);

}  // namespace mia
