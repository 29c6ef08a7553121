#pragma once

#include <optional>

#include "mia/attacks/common.hpp"
#include "mia/partition.hpp"
#include "mia/singleout.hpp"

namespace mia {

struct RocCurve {
  std::vector<double> fpr;         // non-decreasing, starts 0 ends 1
  std::vector<double> tpr;         // non-decreasing, starts 0 ends 1
  std::vector<double> thresholds;  // decision rule: score >= threshold

  std::string to_csv() const;  // two-column fpr,tpr with a threshold column
};

// Both classes must appear in truth; higher score means more member.
RocCurve roc_curve(std::span<const double> scores, std::span<const int> truth);

// Probability a random member outscores a random non-member, ties half.
double auc(std::span<const double> scores, std::span<const int> truth);

double trapezoid_auc(const RocCurve& curve);

// Maximum TPR among thresholds with empirical FPR <= alpha (no interpolation).
double tpr_at_fpr(std::span<const double> scores, std::span<const int> truth, double alpha);

// TPR - FPR of the attack's own decision bits.
double advantage(std::span<const int> predicted, std::span<const int> truth);

struct ClassificationMetrics {
  double accuracy = 0.0;
  std::optional<double> precision;  // absent when nothing is predicted member
  std::optional<double> recall;     // absent when truth has no members
  std::optional<double> f1;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

ClassificationMetrics classification_metrics(std::span<const int> predicted,
                                             std::span<const int> truth);

// Fraction of inference members that are single-outs and were predicted
// member; absent when the inference set contains no single-out members.
std::optional<double> single_out_capture_rate(const AttackResult& result,
                                              const SingleOutReport& singles);

struct BootstrapCi {
  double lo = 0.0;
  double hi = 1.0;
};

// Percentile 95% interval over record resamples.
BootstrapCi bootstrap_auc_ci(std::span<const double> scores, std::span<const int> truth,
                             std::size_t resamples, std::uint64_t seed);

struct MetricsReport {
  double auc = 0.5;
  std::map<double, double> tpr_at_fpr;  // alpha -> tpr
  double advantage = 0.0;
  ClassificationMetrics classification;
  std::optional<double> single_out_capture;
  BootstrapCi auc_ci;
  std::size_t n_members = 0;
  std::size_t n_nonmembers = 0;

  nlohmann::json to_json() const;
};

MetricsReport evaluate_attack(const AttackResult& result,
                              std::span<const double> fpr_alphas = {},
                              const SingleOutReport* singles = nullptr,
                              std::uint64_t bootstrap_seed = 1,
                              std::size_t bootstrap_resamples = 1000);

}  // namespace mia
