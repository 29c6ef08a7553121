#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mia/grid.hpp"
#include "mia/model.hpp"
#include "mia/models/gbt.hpp"
#include "mia/models/logistic.hpp"
#include "mia/models/mlp.hpp"
#include "mia/models/noise.hpp"
#include "mia/rng.hpp"
#include "mia/synthetic.hpp"

using namespace mia;

namespace {

// Two well-separated Gaussian blobs in 2d.
Dataset make_blobs(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Column> cols(3);
  cols[0].schema = {"x0", ColumnKind::numeric, {}};
  cols[1].schema = {"x1", ColumnKind::numeric, {}};
  cols[2].schema = {"y", ColumnKind::categorical, {"0", "1"}};
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    const double cx = label ? 4.0 : -4.0;
    cols[0].num.push_back(cx + rng.next_normal());
    cols[1].num.push_back(-cx + rng.next_normal());
    cols[2].cat.push_back(label);
  }
  return Dataset("blobs", std::move(cols), 2);
}

// XOR over two binary numeric features; only a depth-2 tree separates it.
Dataset make_xor(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Column> cols(3);
  cols[0].schema = {"a", ColumnKind::numeric, {}};
  cols[1].schema = {"b", ColumnKind::numeric, {}};
  cols[2].schema = {"y", ColumnKind::categorical, {"0", "1"}};
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.next_double() < 0.5 ? 0.0 : 1.0;
    const double b = rng.next_double() < 0.5 ? 0.0 : 1.0;
    cols[0].num.push_back(a);
    cols[1].num.push_back(b);
    cols[2].cat.push_back(static_cast<int>(a) ^ static_cast<int>(b));
  }
  return Dataset("xor", std::move(cols), 2);
}

std::vector<std::size_t> all_rows(const Dataset& d) {
  std::vector<std::size_t> r(d.n_rows());
  std::iota(r.begin(), r.end(), std::size_t{0});
  return r;
}

void check_simplex(const TrainedModel& m, const Dataset& d) {
  for (std::size_t r = 0; r < std::min<std::size_t>(d.n_rows(), 50); ++r) {
    auto p = m.predict_row(d, r);
    double sum = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0 + 1e-12);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

}  // namespace

TEST_CASE("every kind outputs probability simplexes and learns blobs") {
  Dataset d = make_blobs(300, 1);
  auto rows = all_rows(d);
  std::vector<std::size_t> train(rows.begin(), rows.begin() + 200);
  std::vector<std::size_t> test(rows.begin() + 200, rows.end());
  for (ModelKind kind : {ModelKind::naive_bayes, ModelKind::logistic_regression,
                         ModelKind::decision_tree, ModelKind::random_forest,
                         ModelKind::gradient_boosted_trees, ModelKind::mlp}) {
    CAPTURE(kind_name(kind));
    ModelSpec spec;
    spec.kind = kind;
    spec.seed = 3;
    if (kind == ModelKind::mlp) spec.hyper["epochs"] = 30;
    if (kind == ModelKind::gradient_boosted_trees) spec.hyper["n_estimators"] = 20;
    TrainedModel m = train_model(spec, d, train);
    check_simplex(m, d);
    CHECK(accuracy(m, d, test) >= 0.97);
  }
}

TEST_CASE("naive bayes separates blobs nearly perfectly") {
  Dataset d = make_blobs(400, 2);
  auto rows = all_rows(d);
  ModelSpec spec;
  spec.kind = ModelKind::naive_bayes;
  TrainedModel m = train_model(spec, d, rows);
  CHECK(accuracy(m, d, rows) >= 0.99);
}

TEST_CASE("naive bayes rejects single-class training data") {
  Dataset d = make_blobs(50, 2);
  std::vector<std::size_t> even;
  for (std::size_t i = 0; i < 50; i += 2) even.push_back(i);
  ModelSpec spec;
  spec.kind = ModelKind::naive_bayes;
  CHECK_THROWS_AS(train_model(spec, d, even), std::runtime_error);
}

TEST_CASE("depth-1 tree cannot solve xor but depth-2 can") {
  Dataset d = make_xor(400, 4);
  auto rows = all_rows(d);
  ModelSpec stump;
  stump.kind = ModelKind::decision_tree;
  stump.hyper["max_depth"] = 1;
  CHECK(accuracy(train_model(stump, d, rows), d, rows) <= 0.75);
  ModelSpec deep;
  deep.kind = ModelKind::decision_tree;
  deep.hyper["max_depth"] = 2;
  CHECK(accuracy(train_model(deep, d, rows), d, rows) >= 0.99);
}

TEST_CASE("unpruned tree drives training error to zero") {
  Dataset d = make_overfit_dataset(300, 6);
  auto rows = all_rows(d);
  ModelSpec spec;
  spec.kind = ModelKind::decision_tree;
  TrainedModel m = train_model(spec, d, rows);
  CHECK(accuracy(m, d, rows) == doctest::Approx(1.0));
}

TEST_CASE("heavy cost-complexity pruning collapses the tree") {
  Dataset d = make_overfit_dataset(300, 6);
  auto rows = all_rows(d);
  ModelSpec spec;
  spec.kind = ModelKind::decision_tree;
  spec.hyper["ccp_alpha"] = 10.0;
  TrainedModel m = train_model(spec, d, rows);
  // a fully pruned tree predicts the majority class everywhere
  auto p0 = m.predict_row(d, 0);
  for (std::size_t r = 1; r < 20; ++r) CHECK(m.predict_row(d, r) == p0);
}

TEST_CASE("logistic regression drives loss near zero on separable data") {
  Dataset d = make_blobs(200, 7);
  auto rows = all_rows(d);
  Encoder e = Encoder::fit(d, rows);
  EncodedMatrix m = e.apply(d, rows);
  ModelSpec spec;
  spec.kind = ModelKind::logistic_regression;
  spec.hyper["max_iter"] = 4000;
  auto lr = LogisticModel::make(spec, m.n_cols, 2);
  lr->train_epochs(m, 4000, 1);
  CHECK(lr->train_loss(m) < 0.01);
}

TEST_CASE("logistic parameters round-trip and stay fixed at convergence") {
  Dataset d = make_blobs(100, 8);
  auto rows = all_rows(d);
  Encoder e = Encoder::fit(d, rows);
  EncodedMatrix m = e.apply(d, rows);
  ModelSpec spec;
  spec.kind = ModelKind::logistic_regression;
  spec.hyper["tol"] = 1e-3;
  auto lr = LogisticModel::make(spec, m.n_cols, 2);
  lr->train_epochs(m, 3000, 1);
  auto params = lr->parameters();
  lr->train_epochs(m, 10, 2);  // converged: extra passes are no-ops
  CHECK(lr->parameters() == params);
}

TEST_CASE("gbt with zero rounds predicts the class prior") {
  Dataset d = make_blobs(90, 9);
  auto rows = all_rows(d);
  ModelSpec spec;
  spec.kind = ModelKind::gradient_boosted_trees;
  spec.hyper["n_estimators"] = 0;
  TrainedModel m = train_model(spec, d, rows);
  auto p = m.predict_row(d, 0);
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("boosting decreases training log-loss monotonically") {
  Dataset d = make_overfit_dataset(200, 10);
  auto rows = all_rows(d);
  Encoder e = Encoder::fit(d, rows);
  EncodedMatrix m = e.apply(d, rows);
  GbtModel::Params params;
  params.n_estimators = 0;
  params.learning_rate = 0.3;
  auto gbt = GbtModel::make(params, m, d.n_classes(), 5);
  double prev = gbt->log_loss(m);
  for (int round = 0; round < 10; ++round) {
    gbt->boost_rounds(m, 1, derive_seed(5, round));
    const double cur = gbt->log_loss(m);
    CHECK(cur <= prev + 1e-9);
    prev = cur;
  }
}

TEST_CASE("gbt early stopping truncates to the best validation round") {
  Dataset d = make_overfit_dataset(400, 11);
  auto rows = all_rows(d);
  std::vector<std::size_t> train(rows.begin(), rows.begin() + 200);
  std::vector<std::size_t> val(rows.begin() + 200, rows.end());
  ModelSpec spec;
  spec.kind = ModelKind::gradient_boosted_trees;
  spec.hyper["n_estimators"] = 500;
  spec.hyper["early_stopping_rounds"] = 5;
  Encoder enc = Encoder::fit(d, train);
  EncodedMatrix vm = enc.apply(d, val);
  TrainedModel m = train_model(spec, d, train, &vm);
  const auto& gbt = dynamic_cast<const GbtModel&>(
      *model_from_json(m.to_json().at("model")));
  CHECK(gbt.n_rounds() < 500);
}

TEST_CASE("mlp analytic gradient matches finite differences") {
  Dataset d = make_blobs(40, 12);
  auto rows = all_rows(d);
  Encoder e = Encoder::fit(d, rows);
  EncodedMatrix m = e.apply(d, rows);
  MlpModel::Params params;
  params.hidden = 5;
  auto mlp = MlpModel::make(params, m.n_cols, 2, 3);
  auto theta = mlp->parameters();
  auto grad = mlp->loss_grad(m);
  REQUIRE(grad.size() == theta.size());
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); i += 7) {  // sampled coordinates
    auto tp = theta;
    tp[i] += h;
    mlp->set_parameters(tp);
    const double up = mlp->loss(m);
    tp[i] -= 2 * h;
    mlp->set_parameters(tp);
    const double down = mlp->loss(m);
    mlp->set_parameters(theta);
    const double fd = (up - down) / (2 * h);
    const double rel = std::abs(fd - grad[i]) / std::max(1e-8, std::abs(fd) + std::abs(grad[i]));
    worst = std::max(worst, rel);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("mlp learns blobs") {
  Dataset d = make_blobs(200, 13);
  auto rows = all_rows(d);
  ModelSpec spec;
  spec.kind = ModelKind::mlp;
  spec.hyper["epochs"] = 50;
  spec.seed = 2;
  TrainedModel m = train_model(spec, d, rows);
  CHECK(accuracy(m, d, rows) >= 0.98);
}

TEST_CASE("training is deterministic in the seed for every kind") {
  Dataset d = make_overfit_dataset(150, 14);
  auto rows = all_rows(d);
  for (ModelKind kind : {ModelKind::naive_bayes, ModelKind::logistic_regression,
                         ModelKind::decision_tree, ModelKind::random_forest,
                         ModelKind::gradient_boosted_trees, ModelKind::mlp}) {
    CAPTURE(kind_name(kind));
    ModelSpec spec;
    spec.kind = kind;
    spec.seed = 21;
    if (kind == ModelKind::mlp) spec.hyper["epochs"] = 5;
    if (kind == ModelKind::gradient_boosted_trees) spec.hyper["n_estimators"] = 10;
    TrainedModel a = train_model(spec, d, rows);
    TrainedModel b = train_model(spec, d, rows);
    for (std::size_t r = 0; r < 20; ++r) CHECK(a.predict_row(d, r) == b.predict_row(d, r));
  }
}

TEST_CASE("models round-trip through json") {
  Dataset d = make_blobs(120, 15);
  auto rows = all_rows(d);
  for (ModelKind kind : {ModelKind::naive_bayes, ModelKind::logistic_regression,
                         ModelKind::decision_tree, ModelKind::random_forest,
                         ModelKind::gradient_boosted_trees, ModelKind::mlp}) {
    CAPTURE(kind_name(kind));
    ModelSpec spec;
    spec.kind = kind;
    spec.seed = 31;
    if (kind == ModelKind::mlp) spec.hyper["epochs"] = 5;
    if (kind == ModelKind::gradient_boosted_trees) spec.hyper["n_estimators"] = 10;
    TrainedModel a = train_model(spec, d, rows);
    TrainedModel b = TrainedModel::from_json(a.to_json());
    for (std::size_t r = 0; r < 20; ++r) {
      auto pa = a.predict_row(d, r);
      auto pb = b.predict_row(d, r);
      REQUIRE(pa.size() == pb.size());
      for (std::size_t k = 0; k < pa.size(); ++k)
        CHECK(pa[k] == doctest::Approx(pb[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("spec validation rejects unknown hyperparameters") {
  ModelSpec spec;
  spec.kind = ModelKind::naive_bayes;
  spec.hyper["bogus"] = 1;
  CHECK_THROWS_AS(validate_spec(spec), std::runtime_error);
}

TEST_CASE("noise model outputs are label-independent and deterministic") {
  Dataset d = make_overfit_dataset(100, 16);
  auto rows = all_rows(d);
  TrainedModel a = make_noise_target(d, rows, 5);
  TrainedModel b = make_noise_target(d, rows, 5);
  for (std::size_t r = 0; r < 30; ++r) {
    auto p = a.predict_row(d, r);
    CHECK(p == b.predict_row(d, r));
    double sum = 0.0;
    for (double v : p) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("grids enumerate the documented number of candidates") {
  CHECK(make_grid(ModelKind::naive_bayes, GridRegime::weak).size() == 11);
  CHECK(make_grid(ModelKind::naive_bayes, GridRegime::defense).size() == 101);
  CHECK(make_grid(ModelKind::decision_tree, GridRegime::weak).size() == 6);
  CHECK(make_grid(ModelKind::decision_tree, GridRegime::defense).size() == 480);
  CHECK(make_grid(ModelKind::random_forest, GridRegime::weak).size() == 12);
  CHECK(make_grid(ModelKind::random_forest, GridRegime::defense).size() == 432);
  CHECK(make_grid(ModelKind::gradient_boosted_trees, GridRegime::weak).size() == 12);
  CHECK(make_grid(ModelKind::gradient_boosted_trees, GridRegime::defense).size() == 576);
  CHECK(make_grid(ModelKind::logistic_regression, GridRegime::weak).size() == 2);
  CHECK(make_grid(ModelKind::logistic_regression, GridRegime::defense).size() == 640);
  CHECK(make_grid(ModelKind::mlp, GridRegime::weak).size() == 1);
}

TEST_CASE("grid combos cover the product row-major and validate") {
  HyperGrid g = make_grid(ModelKind::decision_tree, GridRegime::weak);
  CHECK(g.combo(0)["max_depth"] == 6);
  CHECK(g.combo(0)["min_samples_leaf"] == 1);
  CHECK(g.combo(1)["min_samples_leaf"] == 2);  // last axis varies fastest
  for (std::size_t i = 0; i < g.size(); ++i) {
    ModelSpec spec;
    spec.kind = ModelKind::decision_tree;
    spec.hyper = g.combo(i);
    validate_spec(spec);
  }
}

TEST_CASE("grid search picks the highest validation accuracy") {
  Dataset d = make_overfit_dataset(240, 17);
  auto rows = all_rows(d);
  std::vector<std::size_t> train(rows.begin(), rows.begin() + 160);
  std::vector<std::size_t> val(rows.begin() + 160, rows.end());
  GridSearchResult r =
      grid_search(ModelKind::naive_bayes, GridRegime::weak, d, train, val, 23, 2);
  CHECK(r.n_candidates == 11);
  HyperGrid g = make_grid(ModelKind::naive_bayes, GridRegime::weak);
  for (std::size_t i = 0; i < g.size(); ++i) {
    ModelSpec spec;
    spec.kind = ModelKind::naive_bayes;
    spec.hyper = g.combo(i);
    spec.seed = derive_seed(23, i);
    TrainedModel m = train_model(spec, d, train);
    CHECK(accuracy(m, d, val) <= r.report.test_accuracy + 1e-12);
  }
}
