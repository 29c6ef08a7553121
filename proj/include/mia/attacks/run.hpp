#pragma once

#include "mia/attacks/common.hpp"
#include "mia/attacks/refpool.hpp"

namespace mia {

// Dispatches to the family's implementation. Reference-based families accept
// a prebuilt pool (shared across attacks on the same target); when pool is
// null one is trained on the fly with spec-derived seeds.
AttackResult run_attack(const TrainedModel& target, const Dataset& d, const DataPartition& p,
                        const AttackSpec& spec, std::size_t jobs = 1,
                        const ReferencePool* pool = nullptr);

struct TransferCell {
  AttackFamily family = AttackFamily::metric_loss;
  ModelKind target_kind = ModelKind::naive_bayes;
  ModelKind surrogate_kind = ModelKind::naive_bayes;
  bool baseline = false;  // surrogate matches the target kind
  bool ok = false;
  std::string error;
  AttackResult result;
};

// Full cross product of families x target kinds x surrogate kinds over a
// shared partition; per-cell failures are recorded and the matrix completes.
std::vector<TransferCell> run_transfer_matrix(const Dataset& d, const DataPartition& p,
                                              std::span<const AttackFamily> families,
                                              std::span<const ModelKind> target_kinds,
                                              std::span<const ModelKind> surrogate_kinds,
                                              std::uint64_t seed, std::size_t jobs = 1);

}  // namespace mia
