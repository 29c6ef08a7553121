#pragma once

#include "mia/attacks/common.hpp"

namespace mia {

// Adversary-trained reference models. Online pools draw each model's training
// set as a random half of (population + inference set) and record per-query
// IN/OUT membership; offline pools train on random population halves only, so
// no model ever saw an inference record.
struct ReferencePool {
  bool online = false;
  std::vector<TrainedModel> models;
  std::vector<std::size_t> query_rows;         // inference order: members, non-members
  std::vector<std::vector<char>> in_mask;      // [model][query], online only
  std::vector<std::vector<std::size_t>> train_rows;  // per model

  std::size_t n_models() const { return models.size(); }
};

ReferencePool train_reference_pool(const Dataset& d, const DataPartition& p,
                                   ModelKind kind, std::size_t n_models, bool online,
                                   std::uint64_t seed, std::size_t jobs = 1);

// Each pool model's probability for the query's true label (or the full
// vector via predict); shared by the likelihood-ratio attacks.
std::vector<double> pool_true_class_probs(const ReferencePool& pool, const Dataset& d,
                                          std::size_t row, std::size_t jobs = 1);

}  // namespace mia
