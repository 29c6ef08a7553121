#include "mia/model.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "mia/models/forest.hpp"
#include "mia/models/gbt.hpp"
#include "mia/models/logistic.hpp"
#include "mia/models/mlp.hpp"
#include "mia/models/naive_bayes.hpp"
#include "mia/models/noise.hpp"
#include "mia/rng.hpp"

namespace mia {

std::string kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::naive_bayes: return "naive_bayes";
    case ModelKind::logistic_regression: return "logistic_regression";
    case ModelKind::decision_tree: return "decision_tree";
    case ModelKind::random_forest: return "random_forest";
    case ModelKind::gradient_boosted_trees: return "gradient_boosted_trees";
    case ModelKind::mlp: return "mlp";
  }
  throw std::runtime_error("unknown model kind");
}

ModelKind kind_from_name(const std::string& name) {
  if (name == "naive_bayes" || name == "nb") return ModelKind::naive_bayes;
  if (name == "logistic_regression" || name == "lr") return ModelKind::logistic_regression;
  if (name == "decision_tree" || name == "dt") return ModelKind::decision_tree;
  if (name == "random_forest" || name == "rf") return ModelKind::random_forest;
  if (name == "gradient_boosted_trees" || name == "xgb" || name == "gbt")
    return ModelKind::gradient_boosted_trees;
  if (name == "mlp" || name == "nn") return ModelKind::mlp;
  throw std::runtime_error("unknown model kind: " + name);
}

double ModelSpec::num(const std::string& name, double fallback) const {
  auto it = hyper.find(name);
  if (it == hyper.end() || it->is_null()) return fallback;
  if (it->is_string()) {
    const std::string s = it->get<std::string>();
    if (s == "None" || s == "none") return fallback;
    return std::stod(s);
  }
  return it->get<double>();
}

std::string ModelSpec::str(const std::string& name, const std::string& fallback) const {
  auto it = hyper.find(name);
  if (it == hyper.end() || it->is_null()) return fallback;
  if (it->is_string()) return it->get<std::string>();
  return it->dump();
}

namespace {
const std::set<std::string>& allowed_names(ModelKind kind) {
  static const std::set<std::string> nb = {"var_smoothing"};
  static const std::set<std::string> lr = {"penalty", "l1_ratio", "C", "solver", "tol",
                                           "max_iter"};
  static const std::set<std::string> dt = {"criterion", "max_depth", "min_samples_leaf",
                                           "min_samples_split", "ccp_alpha"};
  static const std::set<std::string> rf = {"criterion",         "max_depth",
                                           "n_estimators",      "min_samples_leaf",
                                           "min_samples_split", "max_features"};
  static const std::set<std::string> gbt = {
      "max_depth", "n_estimators", "min_child_weight",      "subsample", "colsample_bytree",
      "learning_rate", "gamma",    "reg_alpha",  "reg_lambda", "early_stopping_rounds"};
  static const std::set<std::string> mlp = {"hidden", "epochs",    "batch",      "lr",
                                            "weight_decay", "step_size", "step_gamma", "dropout"};
  switch (kind) {
    case ModelKind::naive_bayes: return nb;
    case ModelKind::logistic_regression: return lr;
    case ModelKind::decision_tree: return dt;
    case ModelKind::random_forest: return rf;
    case ModelKind::gradient_boosted_trees: return gbt;
    case ModelKind::mlp: return mlp;
  }
  throw std::runtime_error("unknown model kind");
}
}  // namespace

void validate_spec(const ModelSpec& spec) {
  const auto& allowed = allowed_names(spec.kind);
  for (auto it = spec.hyper.begin(); it != spec.hyper.end(); ++it) {
    if (!allowed.count(it.key()))
      throw std::runtime_error("unknown hyperparameter '" + it.key() + "' for " +
                               kind_name(spec.kind));
  }
}

std::unique_ptr<Model> fit_model(const ModelSpec& spec, const EncodedMatrix& train,
                                 const std::vector<ColumnExpansion>& expansions, int n_classes,
                                 const EncodedMatrix* validation) {
  validate_spec(spec);
  if (train.n_rows < static_cast<std::size_t>(n_classes))
    throw std::runtime_error("fewer training rows than classes");
  switch (spec.kind) {
    case ModelKind::naive_bayes:
      return NaiveBayesModel::fit(spec, train, expansions, n_classes);
    case ModelKind::logistic_regression:
      return LogisticModel::fit(spec, train, n_classes);
    case ModelKind::decision_tree:
      return DecisionTreeModel::fit(spec, train, n_classes);
    case ModelKind::random_forest:
      return RandomForestModel::fit(spec, train, n_classes);
    case ModelKind::gradient_boosted_trees:
      return GbtModel::fit(spec, train, n_classes, validation);
    case ModelKind::mlp:
      return MlpModel::fit(spec, train, n_classes);
  }
  throw std::runtime_error("unknown model kind");
}

std::unique_ptr<Model> model_from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "naive_bayes") return NaiveBayesModel::from_json(j);
  if (type == "logistic_regression") return LogisticModel::from_json(j);
  if (type == "decision_tree") return DecisionTreeModel::from_json(j);
  if (type == "random_forest") return RandomForestModel::from_json(j);
  if (type == "gradient_boosted_trees") return GbtModel::from_json(j);
  if (type == "mlp") return MlpModel::from_json(j);
  if (type == "noise") return NoiseModel::from_json(j);
  throw std::runtime_error("unknown model type in file: " + type);
}

TrainedModel train_model(const ModelSpec& spec, const Dataset& d,
                         std::span<const std::size_t> train_rows,
                         const EncodedMatrix* validation) {
  auto encoder = std::make_shared<Encoder>(Encoder::fit(d, train_rows));
  EncodedMatrix train = encoder->apply(d, train_rows);
  std::shared_ptr<const Model> model =
      fit_model(spec, train, encoder->expansions(), d.n_classes(), validation);
  return TrainedModel(spec, std::move(encoder), std::move(model));
}

double accuracy(const Model& m, const EncodedMatrix& data) {
  std::size_t hits = 0;
  for (std::size_t r = 0; r < data.n_rows; ++r) {
    const auto p = m.predict_proba(data.row(r));
    if (argmax_class(p) == data.y[r]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.n_rows);
}

double accuracy(const TrainedModel& m, const Dataset& d, std::span<const std::size_t> rows) {
  std::size_t hits = 0;
  for (std::size_t r : rows)
    if (m.predict_label(d, r) == d.label(r)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

GeneralizationReport generalization_gap(const TrainedModel& m, const Dataset& d,
                                        std::span<const std::size_t> train_rows,
                                        std::span<const std::size_t> test_rows) {
  if (train_rows.empty() || test_rows.empty())
    throw std::runtime_error("generalization gap needs nonempty train and test sets");
  GeneralizationReport r;
  r.train_accuracy = accuracy(m, d, train_rows);
  r.test_accuracy = accuracy(m, d, test_rows);
  r.gap = r.train_accuracy - r.test_accuracy;
  return r;
}

nlohmann::json TrainedModel::to_json() const {
  nlohmann::json j;
  j["format_version"] = 1;
  j["kind"] = kind_name(spec_.kind);
  j["hyperparameters"] = spec_.hyper;
  j["defended"] = spec_.defended;
  j["seed"] = spec_.seed;
  j["model"] = model_->to_json();
  j["encoder"] = encoder_->to_json();
  return j;
}

TrainedModel TrainedModel::from_json(const nlohmann::json& j) {
  if (j.at("format_version").get<int>() != 1)
    throw std::runtime_error("unsupported model file version");
  ModelSpec spec;
  spec.kind = kind_from_name(j.at("kind").get<std::string>());
  spec.hyper = j.at("hyperparameters");
  spec.defended = j.at("defended").get<bool>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  auto encoder = std::make_shared<Encoder>(Encoder::from_json(j.at("encoder")));
  std::shared_ptr<const Model> model = model_from_json(j.at("model"));
  return TrainedModel(std::move(spec), std::move(encoder), std::move(model));
}

TrainedModel TrainedModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

void TrainedModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << to_json().dump(2) << '\n';
}

}  // namespace mia
