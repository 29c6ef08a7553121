#include "mia/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "mia/rng.hpp"

namespace mia {

namespace {

void check_both_classes(std::span<const int> truth) {
  bool has0 = false, has1 = false;
  for (int t : truth) (t ? has1 : has0) = true;
  if (!has0 || !has1)
    throw std::runtime_error("evaluation needs both member and non-member records");
}

}  // namespace

RocCurve roc_curve(std::span<const double> scores, std::span<const int> truth) {
  if (scores.size() != truth.size()) throw std::runtime_error("score/truth length mismatch");
  check_both_classes(truth);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double pos = 0.0, neg = 0.0;
  for (int t : truth) (t ? pos : neg) += 1.0;

  RocCurve c;
  c.fpr.push_back(0.0);
  c.tpr.push_back(0.0);
  c.thresholds.push_back(std::numeric_limits<double>::infinity());
  double tp = 0.0, fp = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    // consume the whole tie group before emitting a point
    while (i < order.size() && scores[order[i]] == s) {
      if (truth[order[i]]) tp += 1.0;
      else fp += 1.0;
      ++i;
    }
    c.fpr.push_back(fp / neg);
    c.tpr.push_back(tp / pos);
    c.thresholds.push_back(s);
  }
  if (c.fpr.back() != 1.0 || c.tpr.back() != 1.0) {
    c.fpr.push_back(1.0);
    c.tpr.push_back(1.0);
    c.thresholds.push_back(-std::numeric_limits<double>::infinity());
  }
  return c;
}

double auc(std::span<const double> scores, std::span<const int> truth) {
  if (scores.size() != truth.size()) throw std::runtime_error("score/truth length mismatch");
  check_both_classes(truth);
  // rank statistic with half credit for ties
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0.0;
  double pos = 0.0, neg = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based average
    for (std::size_t k = i; k < j; ++k)
      if (truth[order[k]]) rank_sum_pos += avg_rank;
    i = j;
  }
  for (int t : truth) (t ? pos : neg) += 1.0;
  return (rank_sum_pos - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

double trapezoid_auc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.fpr.size(); ++i)
    area += 0.5 * (curve.tpr[i] + curve.tpr[i - 1]) * (curve.fpr[i] - curve.fpr[i - 1]);
  return area;
}

double tpr_at_fpr(std::span<const double> scores, std::span<const int> truth, double alpha) {
  if (alpha <= 0.0 || alpha > 1.0) throw std::runtime_error("alpha must be in (0,1]");
  const RocCurve c = roc_curve(scores, truth);
  double best = 0.0;
  for (std::size_t i = 0; i < c.fpr.size(); ++i)
    if (c.fpr[i] <= alpha) best = std::max(best, c.tpr[i]);
  return best;
}

double advantage(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size())
    throw std::runtime_error("predicted/truth length mismatch");
  double tp = 0, fp = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i]) {
      pos += 1.0;
      if (predicted[i]) tp += 1.0;
    } else {
      neg += 1.0;
      if (predicted[i]) fp += 1.0;
    }
  }
  const double tpr = pos > 0 ? tp / pos : 0.0;
  const double fpr = neg > 0 ? fp / neg : 0.0;
  return tpr - fpr;
}

ClassificationMetrics classification_metrics(std::span<const int> predicted,
                                             std::span<const int> truth) {
  if (predicted.size() != truth.size())
    throw std::runtime_error("predicted/truth length mismatch");
  ClassificationMetrics m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] && truth[i]) ++m.tp;
    else if (predicted[i] && !truth[i]) ++m.fp;
    else if (!predicted[i] && truth[i]) ++m.fn;
    else ++m.tn;
  }
  const double total = static_cast<double>(truth.size());
  m.accuracy = total > 0 ? static_cast<double>(m.tp + m.tn) / total : 0.0;
  if (m.tp + m.fp > 0)
    m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
  if (m.tp + m.fn > 0)
    m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  if (m.precision && m.recall && *m.precision + *m.recall > 0)
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  return m;
}

std::optional<double> single_out_capture_rate(const AttackResult& result,
                                              const SingleOutReport& singles) {
  std::unordered_set<std::size_t> single(singles.single_out_indices.begin(),
                                         singles.single_out_indices.end());
  std::size_t captured = 0, eligible = 0;
  for (std::size_t i = 0; i < result.size(); ++i) {
    if (!result.truth[i] || !single.count(result.record_index[i])) continue;
    ++eligible;
    if (result.predicted[i]) ++captured;
  }
  if (eligible == 0) return std::nullopt;
  return static_cast<double>(captured) / static_cast<double>(eligible);
}

BootstrapCi bootstrap_auc_ci(std::span<const double> scores, std::span<const int> truth,
                             std::size_t resamples, std::uint64_t seed) {
  check_both_classes(truth);
  if (resamples < 2) throw std::runtime_error("bootstrap needs at least 2 resamples");
  Rng rng(seed);
  std::vector<double> stats;
  stats.reserve(resamples);
  const std::size_t n = scores.size();
  std::vector<double> s(n);
  std::vector<int> t(n);
  for (std::size_t b = 0; b < resamples; ++b) {
    Rng br = rng.derive(b);
    bool ok = false;
    // redraw from the same stream on the rare single-class resample
    for (int tries = 0; tries < 100 && !ok; ++tries) {
      bool has0 = false, has1 = false;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = br.next_index(n);
        s[i] = scores[j];
        t[i] = truth[j];
        (t[i] ? has1 : has0) = true;
      }
      ok = has0 && has1;
    }
    if (!ok) throw std::runtime_error("bootstrap could not draw a two-class resample");
    stats.push_back(auc(s, t));
  }
  std::sort(stats.begin(), stats.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(stats.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, stats.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return stats[lo] * (1.0 - frac) + stats[hi] * frac;
  };
  return {quantile(0.025), quantile(0.975)};
}

std::string RocCurve::to_csv() const {
  std::ostringstream out;
  out << "fpr,tpr,threshold\n";
  for (std::size_t i = 0; i < fpr.size(); ++i) {
    out << nlohmann::json(fpr[i]).dump() << ',' << nlohmann::json(tpr[i]).dump() << ',';
    if (std::isfinite(thresholds[i])) out << nlohmann::json(thresholds[i]).dump();
    else out << (thresholds[i] > 0 ? "inf" : "-inf");
    out << '\n';
  }
  return out.str();
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j;
  j["auc"] = auc;
  j["auc_ci"] = {{"lo", auc_ci.lo}, {"hi", auc_ci.hi}};
  nlohmann::json t = nlohmann::json::object();
  for (const auto& [alpha, tpr] : tpr_at_fpr) t[nlohmann::json(alpha).dump()] = tpr;
  j["tpr_at_fpr"] = t;
  j["advantage"] = advantage;
  j["accuracy"] = classification.accuracy;
  j["precision"] = classification.precision ? nlohmann::json(*classification.precision)
                                            : nlohmann::json(nullptr);
  j["recall"] = classification.recall ? nlohmann::json(*classification.recall)
                                      : nlohmann::json(nullptr);
  j["f1"] = classification.f1 ? nlohmann::json(*classification.f1) : nlohmann::json(nullptr);
  j["single_out_capture"] = single_out_capture ? nlohmann::json(*single_out_capture)
                                               : nlohmann::json(nullptr);
  j["counts"] = {{"members", n_members},
                 {"nonmembers", n_nonmembers},
                 {"tp", classification.tp},
                 {"fp", classification.fp},
                 {"tn", classification.tn},
                 {"fn", classification.fn}};
  return j;
}

MetricsReport evaluate_attack(const AttackResult& result, std::span<const double> fpr_alphas,
                              const SingleOutReport* singles, std::uint64_t bootstrap_seed,
                              std::size_t bootstrap_resamples) {
  MetricsReport m;
  m.auc = auc(result.score, result.truth);
  const std::vector<double> default_alphas = {0.01};
  const std::span<const double> alphas =
      fpr_alphas.empty() ? std::span<const double>(default_alphas) : fpr_alphas;
  for (double a : alphas) m.tpr_at_fpr[a] = tpr_at_fpr(result.score, result.truth, a);
  m.advantage = advantage(result.predicted, result.truth);
  m.classification = classification_metrics(result.predicted, result.truth);
  if (singles) m.single_out_capture = single_out_capture_rate(result, *singles);
  m.auc_ci = bootstrap_auc_ci(result.score, result.truth, bootstrap_resamples, bootstrap_seed);
  for (int t : result.truth) (t ? m.n_members : m.n_nonmembers) += 1;
  return m;
}

}  // namespace mia
