#include "mia/attacks/lira.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mia/parallel.hpp"

namespace mia {

namespace {
constexpr double kLogitClip = 1e-6;
constexpr double kVarFloor = 1e-8;
}  // namespace

double logit_confidence(std::span<const double> p, int y) {
  if (y < 0 || static_cast<std::size_t>(y) >= p.size())
    throw std::runtime_error("label out of range in logit");
  double py = p[static_cast<std::size_t>(y)];
  py = std::min(std::max(py, kLogitClip), 1.0 - kLogitClip);
  return std::log(py / (1.0 - py));
}

GaussianFit fit_gaussian(std::span<const double> values, double fallback_var) {
  GaussianFit g;
  g.var = std::max(fallback_var, kVarFloor);
  if (values.empty()) return g;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  g.mean = mean;
  if (values.size() < 2) return g;
  double ssd = 0.0;
  for (double v : values) ssd += (v - mean) * (v - mean);
  g.var = std::max(ssd / static_cast<double>(values.size() - 1), kVarFloor);
  return g;
}

double gaussian_pdf(double x, const GaussianFit& g) {
  const double z = (x - g.mean) * (x - g.mean) / (2.0 * g.var);
  return std::exp(-z) / std::sqrt(2.0 * M_PI * g.var);
}

double gaussian_cdf(double x, const GaussianFit& g) {
  return 0.5 * std::erfc(-(x - g.mean) / std::sqrt(2.0 * g.var));
}

double lira_online_score(double phi, const GaussianFit& in, const GaussianFit& out) {
  const double denom = std::max(gaussian_pdf(phi, out), 1e-300);
  return gaussian_pdf(phi, in) / denom;
}

double lira_offline_score(double phi, const GaussianFit& out) {
  return gaussian_cdf(phi, out);
}

AttackResult run_lira(const TrainedModel& target, const Dataset& d, const DataPartition& p,
                      const ReferencePool& pool, const AttackSpec& spec, std::size_t jobs) {
  const bool online = spec.family == AttackFamily::lira_online;
  if (!online && spec.family != AttackFamily::lira_offline)
    throw std::runtime_error("not a likelihood-ratio family: " + family_name(spec.family));
  if (pool.online != online)
    throw std::runtime_error("reference pool mode does not match the attack family");
  if (online && pool.in_mask.size() != pool.n_models())
    throw std::runtime_error("online pool is missing IN/OUT masks");

  const QueryCache q = make_query_cache(target, d, p);
  const std::size_t n_queries = q.size();
  if (pool.query_rows != q.rows)
    throw std::runtime_error("reference pool was built for a different inference set");

  // phi of every pool model at every query
  std::vector<std::vector<double>> phi(pool.n_models(), std::vector<double>(n_queries));
  parallel_for(pool.n_models(), jobs, [&](std::size_t m) {
    for (std::size_t i = 0; i < n_queries; ++i)
      phi[m][i] = logit_confidence(pool.models[m].predict_row(d, q.rows[i]), q.labels[i]);
  });

  auto side_values = [&](std::size_t i, bool want_in) {
    std::vector<double> v;
    for (std::size_t m = 0; m < pool.n_models(); ++m) {
      const bool is_in = online && pool.in_mask[m][i];
      if (is_in == want_in) v.push_back(phi[m][i]);
    }
    return v;
  };

  // Pooled within-query variance per side, the fallback when a query has
  // fewer than 2 models on a side.
  double global_var[2] = {kVarFloor, kVarFloor};
  for (int side = 0; side < (online ? 2 : 1); ++side) {
    double ssd = 0.0;
    std::size_t dof = 0;
    for (std::size_t i = 0; i < n_queries; ++i) {
      const std::vector<double> v = side_values(i, side == 1);
      if (v.size() < 2) continue;
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      for (double x : v) ssd += (x - mean) * (x - mean);
      dof += v.size() - 1;
    }
    if (dof > 0) global_var[side] = std::max(ssd / static_cast<double>(dof), kVarFloor);
  }

  AttackResult r;
  r.family = spec.family;
  r.seed = spec.seed;
  r.record_index = q.rows;
  r.truth = q.truth;
  r.score.resize(n_queries);
  r.predicted.resize(n_queries);
  for (std::size_t i = 0; i < n_queries; ++i) {
    const double phi_obs = logit_confidence(q.proba[i], q.labels[i]);
    const GaussianFit out = fit_gaussian(side_values(i, false), global_var[0]);
    if (online) {
      const GaussianFit in = fit_gaussian(side_values(i, true), global_var[1]);
      const double s = lira_online_score(phi_obs, in, out);
      r.score[i] = s;
      r.predicted[i] = s >= 1.0 ? 1 : 0;
    } else {
      const double s = lira_offline_score(phi_obs, out);
      r.score[i] = s;
      r.predicted[i] = s >= 0.5 ? 1 : 0;
    }
  }
  return r;
}

}  // namespace mia
