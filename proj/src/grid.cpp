#include "mia/grid.hpp"

#include <cmath>
#include <stdexcept>

#include "mia/parallel.hpp"
#include "mia/rng.hpp"

namespace mia {

namespace {

std::vector<nlohmann::json> logspace_with_head(int num) {
  // the literal grid entry "1e-9, np.logspace(0, -9, num)"
  std::vector<nlohmann::json> out;
  out.push_back(1e-9);
  for (int i = 0; i < num; ++i) {
    const double expo = 0.0 + (-9.0 - 0.0) * static_cast<double>(i) / static_cast<double>(num - 1);
    out.push_back(std::pow(10.0, expo));
  }
  return out;
}

std::vector<nlohmann::json> J(std::initializer_list<nlohmann::json> vals) { return vals; }

}  // namespace

std::size_t HyperGrid::size() const {
  std::size_t n = 1;
  for (const GridAxis& a : axes) n *= a.values.size();
  return n;
}

nlohmann::json HyperGrid::combo(std::size_t index) const {
  nlohmann::json h = nlohmann::json::object();
  // row-major: the last axis varies fastest
  for (std::size_t a = axes.size(); a-- > 0;) {
    const GridAxis& axis = axes[a];
    h[axis.name] = axis.values[index % axis.values.size()];
    index /= axis.values.size();
  }
  return h;
}

HyperGrid make_grid(ModelKind kind, GridRegime regime) {
  HyperGrid g;
  g.kind = kind;
  g.regime = regime;
  const bool weak = regime == GridRegime::weak;
  switch (kind) {
    case ModelKind::naive_bayes:
      g.axes.push_back({"var_smoothing", logspace_with_head(weak ? 10 : 100)});
      break;
    case ModelKind::decision_tree:
      if (weak) {
        g.axes.push_back({"criterion", J({"gini"})});
        g.axes.push_back({"max_depth", J({6, 8, 10})});
        g.axes.push_back({"min_samples_leaf", J({1, 2})});
        g.axes.push_back({"min_samples_split", J({2})});
      } else {
        g.axes.push_back({"criterion", J({"gini", "entropy"})});
        g.axes.push_back({"max_depth", J({2, 4, 6, 8})});
        g.axes.push_back({"min_samples_leaf", J({3, 5, 7, 9})});
        g.axes.push_back({"min_samples_split", J({2, 5, 10})});
        // cost-complexity pruning strength, selected on validation
        g.axes.push_back({"ccp_alpha", J({0.0, 1e-4, 1e-3, 1e-2, 1e-1})});
      }
      break;
    case ModelKind::random_forest:
      if (weak) {
        g.axes.push_back({"max_depth", J({6, 8, 10})});
        g.axes.push_back({"n_estimators", J({100, 400})});
        g.axes.push_back({"min_samples_leaf", J({1, 2})});
        g.axes.push_back({"min_samples_split", J({2})});
        g.axes.push_back({"max_features", J({"None"})});
      } else {
        g.axes.push_back({"max_depth", J({2, 4, 6, 8})});
        g.axes.push_back({"n_estimators", J({300, 500, 700})});
        g.axes.push_back({"min_samples_leaf", J({3, 5, 7, 9})});
        g.axes.push_back({"min_samples_split", J({2, 5, 10})});
        g.axes.push_back({"max_features", J({0.3, 0.6, 0.9})});
      }
      break;
    case ModelKind::gradient_boosted_trees:
      if (weak) {
        g.axes.push_back({"max_depth", J({6, 8, 10})});
        g.axes.push_back({"n_estimators", J({100, 400})});
        g.axes.push_back({"min_child_weight", J({4, 7})});
        g.axes.push_back({"subsample", J({1})});
        g.axes.push_back({"colsample_bytree", J({1})});
        g.axes.push_back({"learning_rate", J({0.3})});
        g.axes.push_back({"gamma", J({0})});
        g.axes.push_back({"reg_alpha", J({0})});
        g.axes.push_back({"reg_lambda", J({1})});
      } else {
        g.axes.push_back({"max_depth", J({2, 4, 6, 8})});
        g.axes.push_back({"n_estimators", J({1000})});
        g.axes.push_back({"early_stopping_rounds", J({5})});
        g.axes.push_back({"min_child_weight", J({5, 7, 9})});
        g.axes.push_back({"subsample", J({0.3, 0.6})});
        g.axes.push_back({"colsample_bytree", J({0.3, 0.6})});
        g.axes.push_back({"learning_rate", J({0.001, 0.01, 0.1})});
        g.axes.push_back({"gamma", J({0, 1})});
        g.axes.push_back({"reg_alpha", J({0, 1})});
        g.axes.push_back({"reg_lambda", J({10})});
      }
      break;
    case ModelKind::logistic_regression:
      if (weak) {
        g.axes.push_back({"penalty", J({"None"})});
        g.axes.push_back({"l1_ratio", J({"None"})});
        g.axes.push_back({"C", J({0.0})});
        g.axes.push_back({"solver", J({"lbfgs"})});
        g.axes.push_back({"tol", J({1e-5, 1e-4})});
      } else {
        g.axes.push_back({"penalty", J({"l2", "elasticnet"})});
        g.axes.push_back({"l1_ratio", J({"None", 0.3, 0.5, 0.7})});
        g.axes.push_back({"C", J({0.0001, 0.001, 0.01, 0.1, 1})});
        g.axes.push_back({"solver", J({"lbfgs", "newton-cg", "saga", "sag"})});
        g.axes.push_back({"tol", J({1e-5, 1e-4, 0.001, 0.01})});
      }
      break;
    case ModelKind::mlp:
      // the architecture is fixed; the defense variant is dropout + lower lr
      g.axes.push_back({"dropout", J({weak ? 0.0 : 0.5})});
      g.axes.push_back({"lr", J({weak ? 0.001 : 0.0001})});
      break;
  }
  return g;
}

GridSearchResult grid_search(ModelKind kind, GridRegime regime, const Dataset& d,
                             std::span<const std::size_t> train_rows,
                             std::span<const std::size_t> val_rows, std::uint64_t seed,
                             std::size_t jobs) {
  if (val_rows.empty()) throw std::runtime_error("grid search needs a validation set");
  const HyperGrid grid = make_grid(kind, regime);
  const std::size_t n = grid.size();

  struct Candidate {
    ModelSpec spec;
    GeneralizationReport report;
    TrainedModel model;
  };
  std::vector<Candidate> results(n);

  parallel_for(n, jobs, [&](std::size_t i) {
    ModelSpec spec;
    spec.kind = kind;
    spec.hyper = grid.combo(i);
    spec.defended = regime == GridRegime::defense;
    spec.seed = derive_seed(seed, i);

    // Early-stopped boosting consumes the validation rows encoded with the
    // candidate's own encoder (train_model refits an identical one).
    Encoder encoder = Encoder::fit(d, train_rows);
    EncodedMatrix validation = encoder.apply(d, val_rows);
    TrainedModel model = train_model(spec, d, train_rows, &validation);
    Candidate c;
    c.spec = spec;
    c.report = generalization_gap(model, d, train_rows, val_rows);
    c.model = std::move(model);
    results[i] = std::move(c);
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const auto& a = results[i].report;
    const auto& b = results[best].report;
    if (a.test_accuracy > b.test_accuracy + 1e-12 ||
        (std::abs(a.test_accuracy - b.test_accuracy) <= 1e-12 && a.gap < b.gap - 1e-12))
      best = i;
  }

  GridSearchResult out;
  out.best_spec = std::move(results[best].spec);
  out.report = results[best].report;
  out.model = std::move(results[best].model);
  out.n_candidates = n;
  return out;
}

}  // namespace mia
