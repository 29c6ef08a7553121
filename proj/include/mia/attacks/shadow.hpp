#pragma once

#include "mia/attacks/common.hpp"
#include "mia/rng.hpp"

namespace mia {

// Adversary-side replica of the target's train/test split, drawn from the
// population half only.
struct ShadowSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  bool shrunk = false;  // population too small for a full-size replica
};

ShadowSplit make_shadow_split(const DataPartition& p, Rng& rng);

enum class ShadowMode { predictions, probabilities };

// One row per shadow train/test record. Features are the model's top-k
// probabilities sorted descending (probabilities mode) or the predicted label
// as a categorical column (predictions mode), plus the true label; the
// dataset label is the membership bit.
Dataset build_shadow_attack_dataset(const TrainedModel& shadow, const Dataset& d,
                                    std::span<const std::size_t> shadow_train,
                                    std::span<const std::size_t> shadow_test, ShadowMode mode,
                                    int top_k);

// The same row construction applied to arbitrary (probability vector, label)
// queries; the membership bit carries the ground truth so evaluation can read
// it back, the attack classifier never uses it as a feature.
Dataset build_attack_query_dataset(const QueryCache& q, ShadowMode mode, int top_k,
                                   int n_classes);

AttackResult run_shadow_attack(const TrainedModel& target, const Dataset& d,
                               const DataPartition& p, const AttackSpec& spec);

}  // namespace mia
