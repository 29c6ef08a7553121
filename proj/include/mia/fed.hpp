#pragma once

#include "mia/model.hpp"
#include "mia/partition.hpp"

namespace mia {

enum class Aggregation { fedavg_weights, cyclic_boosting };

struct FederatedConfig {
  std::size_t n_participants = 3;
  std::size_t rounds = 20;
  std::size_t local_epochs = 10;     // parametric kinds
  std::size_t trees_per_round = 5;   // boosted trees
  std::uint64_t seed = 0;
};

// Sample-size weighted mean of parameter vectors.
std::vector<double> fedavg_aggregate(
    const std::vector<std::pair<std::vector<double>, std::size_t>>& updates);

// One participant step: adopt the incoming global parameters, then train
// local_epochs passes on the local shard only.
std::pair<std::vector<double>, std::size_t> local_update(ParametricModel& model,
                                                         std::span<const double> global_params,
                                                         const EncodedMatrix& shard,
                                                         std::size_t local_epochs,
                                                         std::uint64_t seed);

// In-process federated training. FedAvg for mlp/logistic_regression,
// round-robin cyclic boosting for gradient_boosted_trees; other kinds are
// rejected. The returned handle is the outsider attack surface: black-box
// probability prediction only.
TrainedModel train_federated(const ModelSpec& base_spec, const Dataset& d,
                             const std::vector<FederatedShard>& shards,
                             const FederatedConfig& cfg);

}  // namespace mia
