#pragma once

#include "mia/attacks/common.hpp"
#include "mia/attacks/refpool.hpp"

namespace mia {

// Fraction of population anchors z with
//   LR(x,z) = [p_target(x)/Pr(x)] * [Pr(z)/p_target(z)] >= gamma,
// all probabilities taken at the record's true label. Pr is the reference
// pool mean; offline pools interpolate the query side:
//   Pr(x) ~ 0.5*((1+a)*Pr_out(x) + (1-a)).
double rmia_score(double p_target_x, double pr_x, std::span<const double> p_target_z,
                  std::span<const double> pr_z, double gamma);

double rmia_offline_interpolate(double pr_out, double a);

AttackResult run_rmia(const TrainedModel& target, const Dataset& d, const DataPartition& p,
                      const ReferencePool& pool, const AttackSpec& spec,
                      std::size_t jobs = 1);

}  // namespace mia
