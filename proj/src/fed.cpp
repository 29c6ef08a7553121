#include "mia/fed.hpp"

#include <stdexcept>

#include "mia/models/gbt.hpp"
#include "mia/models/logistic.hpp"
#include "mia/models/mlp.hpp"
#include "mia/parallel.hpp"
#include "mia/rng.hpp"

namespace mia {

std::vector<double> fedavg_aggregate(
    const std::vector<std::pair<std::vector<double>, std::size_t>>& updates) {
  if (updates.empty()) throw std::runtime_error("fedavg on empty update list");
  const std::size_t dim = updates.front().first.size();
  double total = 0.0;
  for (const auto& [params, n] : updates) {
    if (params.size() != dim) throw std::runtime_error("parameter shape mismatch in fedavg");
    total += static_cast<double>(n);
  }
  std::vector<double> out(dim, 0.0);
  for (const auto& [params, n] : updates) {
    const double w = static_cast<double>(n) / total;
    for (std::size_t i = 0; i < dim; ++i) out[i] += w * params[i];
  }
  return out;
}

std::pair<std::vector<double>, std::size_t> local_update(ParametricModel& model,
                                                         std::span<const double> global_params,
                                                         const EncodedMatrix& shard,
                                                         std::size_t local_epochs,
                                                         std::uint64_t seed) {
  if (shard.n_rows == 0) throw std::runtime_error("local update on empty shard");
  model.set_parameters(global_params);
  if (local_epochs > 0) model.train_epochs(shard, local_epochs, seed);
  return {model.parameters(), shard.n_rows};
}

namespace {

std::unique_ptr<ParametricModel> make_parametric(const ModelSpec& spec, std::size_t n_features,
                                                 int n_classes) {
  if (spec.kind == ModelKind::logistic_regression)
    return LogisticModel::make(spec, n_features, n_classes);
  if (spec.kind == ModelKind::mlp)
    return MlpModel::make(MlpModel::params_from_spec(spec), n_features, n_classes, spec.seed);
  throw std::runtime_error("kind is not parametric: " + kind_name(spec.kind));
}

}  // namespace

TrainedModel train_federated(const ModelSpec& base_spec, const Dataset& d,
                             const std::vector<FederatedShard>& shards,
                             const FederatedConfig& cfg) {
  if (cfg.rounds < 1) throw std::runtime_error("federated training needs rounds >= 1");
  if (shards.size() < 1) throw std::runtime_error("federated training needs participants");
  validate_spec(base_spec);
  const std::size_t n_participants = shards.size();

  // Shared preprocessing pipeline fitted on the union of the train shards.
  std::vector<std::size_t> union_train;
  for (const FederatedShard& s : shards) {
    if (s.train.empty()) throw std::runtime_error("empty participant shard");
    union_train.insert(union_train.end(), s.train.begin(), s.train.end());
  }
  auto encoder = std::make_shared<Encoder>(Encoder::fit(d, union_train));
  const int n_classes = d.n_classes();

  std::vector<EncodedMatrix> shard_data;
  shard_data.reserve(n_participants);
  for (const FederatedShard& s : shards) shard_data.push_back(encoder->apply(d, s.train));

  std::shared_ptr<const Model> global;

  switch (base_spec.kind) {
    case ModelKind::logistic_regression:
    case ModelKind::mlp: {
      auto reference = make_parametric(base_spec, encoder->n_out_cols(), n_classes);
      std::vector<double> global_params = reference->parameters();
      for (std::size_t round = 0; round < cfg.rounds; ++round) {
        std::vector<std::pair<std::vector<double>, std::size_t>> updates(n_participants);
        parallel_for(n_participants, n_participants, [&](std::size_t j) {
          auto local = make_parametric(base_spec, encoder->n_out_cols(), n_classes);
          updates[j] = local_update(*local, global_params, shard_data[j], cfg.local_epochs,
                                    derive_seed(cfg.seed, round * n_participants + j));
        });
        global_params = fedavg_aggregate(updates);
      }
      reference->set_parameters(global_params);
      global = std::move(reference);
      break;
    }
    case ModelKind::gradient_boosted_trees: {
      // Round-robin cyclic boosting: each participant appends trees fitted
      // to the residuals of the current global ensemble on its own shard.
      EncodedMatrix union_data = encoder->apply(d, union_train);
      auto gbt = GbtModel::make(GbtModel::params_from_spec(base_spec), union_data, n_classes,
                                cfg.seed);
      for (std::size_t round = 0; round < cfg.rounds; ++round) {
        const std::size_t j = round % n_participants;
        gbt->boost_rounds(shard_data[j], cfg.trees_per_round, derive_seed(cfg.seed, round));
      }
      global = std::move(gbt);
      break;
    }
    default:
      throw std::runtime_error("kind not supported in federated mode: " +
                               kind_name(base_spec.kind));
  }

  return TrainedModel(base_spec, std::move(encoder), std::move(global));
}

}  // namespace mia
