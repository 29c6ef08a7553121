#include "mia/attacks/metric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mia/attacks/shadow.hpp"
#include "mia/rng.hpp"

namespace mia {

double metric_score(std::span<const double> p, int y, AttackFamily family) {
  if (y < 0 || static_cast<std::size_t>(y) >= p.size())
    throw std::runtime_error("label out of range in metric score");
  const double py = std::max(p[static_cast<std::size_t>(y)], kProbFloor);
  switch (family) {
    case AttackFamily::metric_correctness:
      return argmax_class(p) == y ? 1.0 : 0.0;
    case AttackFamily::metric_loss:
      return -std::log(py);
    case AttackFamily::metric_confidence:
      return *std::max_element(p.begin(), p.end());
    case AttackFamily::metric_modified_entropy: {
      double s = -(1.0 - py) * std::log(py);
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (static_cast<int>(i) == y) continue;
        s -= p[i] * std::log(std::max(1.0 - p[i], kProbFloor));
      }
      return s;
    }
    default:
      throw std::runtime_error("not a metric family: " + family_name(family));
  }
}

bool metric_member_if_leq(AttackFamily family) {
  return family == AttackFamily::metric_loss ||
         family == AttackFamily::metric_modified_entropy;
}

double best_accuracy_threshold(std::span<const double> member_scores,
                               std::span<const double> nonmember_scores, bool member_if_leq,
                               double* best_accuracy) {
  std::vector<double> all(member_scores.begin(), member_scores.end());
  all.insert(all.end(), nonmember_scores.begin(), nonmember_scores.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  std::vector<double> candidates;
  candidates.push_back(all.front() - 1.0);
  for (std::size_t i = 0; i + 1 < all.size(); ++i)
    candidates.push_back(0.5 * (all[i] + all[i + 1]));
  candidates.push_back(all.back() + 1.0);
  // the exact observed values too, so ties at the threshold are reachable
  candidates.insert(candidates.end(), all.begin(), all.end());
  std::sort(candidates.begin(), candidates.end());

  const double total =
      static_cast<double>(member_scores.size() + nonmember_scores.size());
  double best = -1.0;
  double best_beta = candidates.front();
  for (double beta : candidates) {
    std::size_t correct = 0;
    for (double s : member_scores)
      if (member_if_leq ? s <= beta : s >= beta) ++correct;
    for (double s : nonmember_scores)
      if (!(member_if_leq ? s <= beta : s >= beta)) ++correct;
    const double acc = static_cast<double>(correct) / total;
    if (acc > best + 1e-15) {  // ties keep the smallest candidate
      best = acc;
      best_beta = beta;
    }
  }
  if (best_accuracy) *best_accuracy = best;
  return best_beta;
}

ThresholdRule select_threshold(std::span<const double> member_scores,
                               std::span<const int> member_labels,
                               std::span<const double> nonmember_scores,
                               std::span<const int> nonmember_labels, int n_classes,
                               AttackFamily family) {
  if (member_scores.empty() || nonmember_scores.empty())
    throw std::runtime_error("threshold selection needs shadow scores on both sides");
  ThresholdRule rule;
  rule.member_if_leq = metric_member_if_leq(family);
  rule.global = best_accuracy_threshold(member_scores, nonmember_scores, rule.member_if_leq);
  rule.per_class.assign(static_cast<std::size_t>(n_classes), rule.global);
  for (int c = 0; c < n_classes; ++c) {
    std::vector<double> mc, nc;
    for (std::size_t i = 0; i < member_scores.size(); ++i)
      if (member_labels[i] == c) mc.push_back(member_scores[i]);
    for (std::size_t i = 0; i < nonmember_scores.size(); ++i)
      if (nonmember_labels[i] == c) nc.push_back(nonmember_scores[i]);
    if (mc.empty() || nc.empty() || mc.size() + nc.size() < 2) continue;  // global fallback
    rule.per_class[static_cast<std::size_t>(c)] =
        best_accuracy_threshold(mc, nc, rule.member_if_leq);
  }
  return rule;
}

ThresholdRule select_percentile_threshold(std::span<const double> nonmember_scores,
                                          double t, AttackFamily family) {
  if (nonmember_scores.empty())
    throw std::runtime_error("percentile threshold needs shadow-test scores");
  if (t <= 0.0 || t >= 100.0) throw std::runtime_error("percentile t must be in (0,100)");
  ThresholdRule rule;
  rule.member_if_leq = metric_member_if_leq(family);
  std::vector<double> sorted(nonmember_scores.begin(), nonmember_scores.end());
  std::sort(sorted.begin(), sorted.end());
  // top-t percentile in the member direction, nearest-rank
  const double q = rule.member_if_leq ? t / 100.0 : 1.0 - t / 100.0;
  std::size_t idx = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(sorted.size())));
  if (idx > 0) --idx;
  if (idx >= sorted.size()) idx = sorted.size() - 1;
  rule.global = sorted[idx];
  rule.per_class.assign(0, 0.0);
  return rule;
}

AttackResult run_metric_attack(const TrainedModel& target, const Dataset& d,
                               const DataPartition& p, const AttackSpec& spec) {
  if (!metric_member_if_leq(spec.family) && spec.family != AttackFamily::metric_correctness &&
      spec.family != AttackFamily::metric_confidence)
    throw std::runtime_error("not a metric family: " + family_name(spec.family));

  Rng rng(derive_seed(spec.seed, 0));
  const ShadowSplit ss = make_shadow_split(p, rng);
  ModelSpec shadow_spec;
  shadow_spec.kind = spec.surrogate_kind;
  shadow_spec.seed = derive_seed(spec.seed, 1);
  const TrainedModel shadow = train_model(shadow_spec, d, ss.train);

  std::vector<double> member_scores, nonmember_scores;
  std::vector<int> member_labels, nonmember_labels;
  for (std::size_t r : ss.train) {
    member_scores.push_back(metric_score(shadow.predict_row(d, r), d.label(r), spec.family));
    member_labels.push_back(d.label(r));
  }
  for (std::size_t r : ss.test) {
    nonmember_scores.push_back(
        metric_score(shadow.predict_row(d, r), d.label(r), spec.family));
    nonmember_labels.push_back(d.label(r));
  }

  const ThresholdRule rule =
      spec.percentile_threshold
          ? select_percentile_threshold(nonmember_scores, spec.percentile_t, spec.family)
          : select_threshold(member_scores, member_labels, nonmember_scores,
                             nonmember_labels, d.n_classes(), spec.family);

  const QueryCache q = make_query_cache(target, d, p);
  AttackResult r;
  r.family = spec.family;
  r.seed = spec.seed;
  r.record_index = q.rows;
  r.truth = q.truth;
  r.score.reserve(q.size());
  r.predicted.reserve(q.size());
  const bool leq = metric_member_if_leq(spec.family);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double raw = metric_score(q.proba[i], q.labels[i], spec.family);
    r.score.push_back(leq ? -raw : raw);
    r.predicted.push_back(rule.decide(raw, q.labels[i]));
  }
  return r;
}

}  // namespace mia
