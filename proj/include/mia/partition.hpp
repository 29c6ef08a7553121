#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mia/dataset.hpp"

namespace mia {

// The split protocol: half the data is adversary-side population, the rest is
// the target's private data (75% train / 25% test). The inference set is a
// balanced member/non-member pool drawn from train and test respectively.
struct DataPartition {
  std::vector<std::size_t> population;
  std::vector<std::size_t> target_train;
  std::vector<std::size_t> target_test;
  std::vector<std::size_t> inference_members;     // subset of target_train
  std::vector<std::size_t> inference_nonmembers;  // subset of target_test
  std::uint64_t seed = 0;
};

DataPartition make_partition(const Dataset& d, std::uint64_t seed);

struct FederatedShard {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Splits target_train and target_test into n disjoint, size-balanced shards.
std::vector<FederatedShard> make_federated_shards(const DataPartition& p,
                                                  std::size_t n_participants,
                                                  std::uint64_t seed);

nlohmann::json partition_to_json(const DataPartition& p);
DataPartition partition_from_json(const nlohmann::json& j);

}  // namespace mia
