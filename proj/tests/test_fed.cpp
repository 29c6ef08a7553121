#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mia/fed.hpp"
#include "mia/models/logistic.hpp"
#include "mia/synthetic.hpp"

using namespace mia;

namespace {

std::vector<double> logistic_weights(const TrainedModel& m) {
  return m.to_json().at("model").at("w").get<std::vector<double>>();
}

}  // namespace

TEST_CASE("fedavg aggregate is the sample-size weighted mean") {
  std::vector<std::pair<std::vector<double>, std::size_t>> updates = {
      {{1.0, 2.0}, 1}, {{4.0, 8.0}, 3}};
  auto out = fedavg_aggregate(updates);
  CHECK(out[0] == doctest::Approx(0.25 * 1.0 + 0.75 * 4.0));
  CHECK(out[1] == doctest::Approx(0.25 * 2.0 + 0.75 * 8.0));
  updates[1].first.resize(3);
  CHECK_THROWS_AS(fedavg_aggregate(updates), std::runtime_error);
}

TEST_CASE("identical shards make fedavg match centralized logistic training") {
  Dataset d = make_overfit_dataset(300, 1);
  DataPartition p = make_partition(d, 2);

  FederatedConfig cfg;
  cfg.rounds = 10;
  cfg.local_epochs = 10;
  cfg.seed = 3;
  ModelSpec spec;
  spec.kind = ModelKind::logistic_regression;
  spec.seed = 3;

  std::vector<FederatedShard> shards(3);
  for (auto& s : shards) s.train = p.target_train;  // every participant sees the same data
  TrainedModel fed = train_federated(spec, d, shards, cfg);

  Encoder enc = Encoder::fit(d, p.target_train);
  EncodedMatrix train = enc.apply(d, p.target_train);
  auto central = LogisticModel::make(spec, train.n_cols, d.n_classes());
  central->train_epochs(train, cfg.rounds * cfg.local_epochs, 3);

  const auto fw = logistic_weights(fed);
  const auto cw = central->parameters();
  REQUIRE(fw.size() == cw.size());
  for (std::size_t i = 0; i < fw.size(); ++i)
    CHECK(std::abs(fw[i] - cw[i]) < 1e-6);
}

TEST_CASE("fedavg global model is invariant to participant order") {
  Dataset d = make_overfit_dataset(400, 4);
  DataPartition p = make_partition(d, 5);
  auto shards = make_federated_shards(p, 3, 6);
  ModelSpec spec;
  spec.kind = ModelKind::logistic_regression;
  spec.seed = 7;
  FederatedConfig cfg;
  cfg.rounds = 5;
  cfg.local_epochs = 4;
  cfg.seed = 8;
  TrainedModel a = train_federated(spec, d, shards, cfg);
  std::swap(shards[0], shards[2]);
  TrainedModel b = train_federated(spec, d, shards, cfg);
  const auto wa = logistic_weights(a);
  const auto wb = logistic_weights(b);
  for (std::size_t i = 0; i < wa.size(); ++i) CHECK(std::abs(wa[i] - wb[i]) < 1e-9);
}

TEST_CASE("zero local epochs leave the initial parameters untouched") {
  Dataset d = make_overfit_dataset(200, 9);
  DataPartition p = make_partition(d, 10);
  auto shards = make_federated_shards(p, 2, 11);
  ModelSpec spec;
  spec.kind = ModelKind::logistic_regression;
  FederatedConfig cfg;
  cfg.rounds = 3;
  cfg.local_epochs = 0;
  TrainedModel fed = train_federated(spec, d, shards, cfg);
  for (double w : logistic_weights(fed)) CHECK(w == 0.0);  // zero init
}

TEST_CASE("single-participant cyclic boosting equals centralized boosting") {
  Dataset d = make_overfit_dataset(250, 12);
  DataPartition p = make_partition(d, 13);
  std::vector<FederatedShard> shards(1);
  shards[0].train = p.target_train;
  ModelSpec spec;
  spec.kind = ModelKind::gradient_boosted_trees;
  spec.hyper["n_estimators"] = 20;
  spec.seed = 14;
  FederatedConfig cfg;
  cfg.rounds = 4;
  cfg.trees_per_round = 5;
  cfg.seed = 14;
  TrainedModel fed = train_federated(spec, d, shards, cfg);
  TrainedModel central = train_model(spec, d, p.target_train);
  for (std::size_t r = 0; r < 30; ++r) {
    auto pf = fed.predict_row(d, r);
    auto pc = central.predict_row(d, r);
    for (std::size_t k = 0; k < pf.size(); ++k)
      CHECK(pf[k] == doctest::Approx(pc[k]).epsilon(1e-9));
  }
}

TEST_CASE("cyclic boosting over disjoint shards still learns") {
  Dataset d = make_overfit_dataset(400, 15);
  DataPartition p = make_partition(d, 16);
  auto shards = make_federated_shards(p, 3, 17);
  ModelSpec spec;
  spec.kind = ModelKind::gradient_boosted_trees;
  spec.seed = 18;
  FederatedConfig cfg;
  cfg.rounds = 9;
  cfg.trees_per_round = 3;
  cfg.seed = 18;
  TrainedModel fed = train_federated(spec, d, shards, cfg);
  CHECK(accuracy(fed, d, p.target_train) > 0.8);
}

TEST_CASE("non-aggregatable kinds are rejected") {
  Dataset d = make_overfit_dataset(120, 19);
  DataPartition p = make_partition(d, 20);
  auto shards = make_federated_shards(p, 2, 21);
  for (ModelKind kind :
       {ModelKind::naive_bayes, ModelKind::decision_tree, ModelKind::random_forest}) {
    ModelSpec spec;
    spec.kind = kind;
    CHECK_THROWS_AS(train_federated(spec, d, shards, FederatedConfig{}), std::runtime_error);
  }
}

TEST_CASE("the federated handle answers black-box queries like any model") {
  Dataset d = make_overfit_dataset(200, 22);
  DataPartition p = make_partition(d, 23);
  auto shards = make_federated_shards(p, 3, 24);
  ModelSpec spec;
  spec.kind = ModelKind::mlp;
  spec.hyper["epochs"] = 2;
  FederatedConfig cfg;
  cfg.rounds = 2;
  cfg.local_epochs = 2;
  TrainedModel fed = train_federated(spec, d, shards, cfg);
  CHECK(fed.n_classes() == d.n_classes());
  auto prob = fed.predict_row(d, 0);
  double sum = 0.0;
  for (double v : prob) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}
