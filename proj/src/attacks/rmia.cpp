#include "mia/attacks/rmia.hpp"

#include <algorithm>
#include <stdexcept>

#include "mia/parallel.hpp"
#include "mia/rng.hpp"

namespace mia {

double rmia_score(double p_target_x, double pr_x, std::span<const double> p_target_z,
                  std::span<const double> pr_z, double gamma) {
  if (p_target_z.empty()) throw std::runtime_error("rmia needs a nonempty anchor set");
  if (p_target_z.size() != pr_z.size())
    throw std::runtime_error("anchor probability vectors disagree in length");
  const double ratio_x = std::max(p_target_x, kProbFloor) / std::max(pr_x, kProbFloor);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < p_target_z.size(); ++i) {
    const double ratio_z = std::max(pr_z[i], kProbFloor) / std::max(p_target_z[i], kProbFloor);
    if (ratio_x * ratio_z >= gamma) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(p_target_z.size());
}

double rmia_offline_interpolate(double pr_out, double a) {
  return 0.5 * ((1.0 + a) * pr_out + (1.0 - a));
}

AttackResult run_rmia(const TrainedModel& target, const Dataset& d, const DataPartition& p,
                      const ReferencePool& pool, const AttackSpec& spec, std::size_t jobs) {
  const bool online = spec.family == AttackFamily::rmia_online;
  if (!online && spec.family != AttackFamily::rmia_offline)
    throw std::runtime_error("not an rmia family: " + family_name(spec.family));
  if (pool.online != online)
    throw std::runtime_error("reference pool mode does not match the attack family");

  const QueryCache q = make_query_cache(target, d, p);
  if (pool.query_rows != q.rows)
    throw std::runtime_error("reference pool was built for a different inference set");

  // Population anchors, disjoint from the inference set by construction.
  Rng rng(derive_seed(spec.seed, 0xD1CE));
  const std::size_t z_count = std::min(spec.rmia_z_max, p.population.size());
  if (z_count == 0) throw std::runtime_error("no population rows available for rmia anchors");
  const std::vector<std::size_t> anchors = rng.sample(p.population, z_count);

  // Target and pool-mean probabilities at each anchor's own label.
  std::vector<double> p_target_z(z_count), pr_z(z_count);
  parallel_for(z_count, jobs, [&](std::size_t i) {
    const std::size_t row = anchors[i];
    const int y = d.label(row);
    p_target_z[i] = target.predict_row(d, row)[static_cast<std::size_t>(y)];
    const std::vector<double> ref = pool_true_class_probs(pool, d, row);
    double mean = 0.0;
    for (double v : ref) mean += v;
    pr_z[i] = mean / static_cast<double>(ref.size());
  });

  const std::size_t n_queries = q.size();
  std::vector<double> pr_x(n_queries);
  parallel_for(n_queries, jobs, [&](std::size_t i) {
    const std::vector<double> ref = pool_true_class_probs(pool, d, q.rows[i]);
    double mean = 0.0;
    for (double v : ref) mean += v;
    mean /= static_cast<double>(ref.size());
    pr_x[i] = online ? mean : rmia_offline_interpolate(mean, spec.rmia_offline_a);
  });

  AttackResult r;
  r.family = spec.family;
  r.seed = spec.seed;
  r.record_index = q.rows;
  r.truth = q.truth;
  r.score.resize(n_queries);
  r.predicted.resize(n_queries);
  for (std::size_t i = 0; i < n_queries; ++i) {
    const double px = q.proba[i][static_cast<std::size_t>(q.labels[i])];
    const double s = rmia_score(px, pr_x[i], p_target_z, pr_z, spec.rmia_gamma);
    r.score[i] = s;
    r.predicted[i] = s >= 0.5 ? 1 : 0;
  }
  return r;
}

}  // namespace mia
