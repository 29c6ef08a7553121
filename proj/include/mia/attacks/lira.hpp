#pragma once

#include "mia/attacks/common.hpp"
#include "mia/attacks/refpool.hpp"

namespace mia {

// Log-odds of the true-class probability, clipped into [1e-6, 1-1e-6].
double logit_confidence(std::span<const double> p, int y);

struct GaussianFit {
  double mean = 0.0;
  double var = 1e-8;  // floored
};

// Unbiased sample variance with the 1e-8 floor; fewer than 2 values fall back
// to fallback_var (the pooled global variance of that side).
GaussianFit fit_gaussian(std::span<const double> values, double fallback_var);

double gaussian_pdf(double x, const GaussianFit& g);
double gaussian_cdf(double x, const GaussianFit& g);

// Online: pdf(phi; IN) / pdf(phi; OUT). Offline: P[Z <= phi], Z ~ N(OUT).
double lira_online_score(double phi, const GaussianFit& in, const GaussianFit& out);
double lira_offline_score(double phi, const GaussianFit& out);

AttackResult run_lira(const TrainedModel& target, const Dataset& d, const DataPartition& p,
                      const ReferencePool& pool, const AttackSpec& spec,
                      std::size_t jobs = 1);

}  // namespace mia
