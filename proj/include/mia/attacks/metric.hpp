#pragma once

#include "mia/attacks/common.hpp"

namespace mia {

// Raw per-record statistic, before the member-direction orientation.
double metric_score(std::span<const double> p, int y, AttackFamily family);

// True when a smaller raw score indicates membership (loss, modified
// entropy); such scores are negated before storage so higher always means
// more member.
bool metric_member_if_leq(AttackFamily family);

struct ThresholdRule {
  // One threshold per task class, indexed by true label; classes without
  // enough shadow data fall back to the global threshold.
  std::vector<double> per_class;
  double global = 0.0;
  bool member_if_leq = false;

  double threshold_for(int label) const {
    if (label >= 0 && static_cast<std::size_t>(label) < per_class.size())
      return per_class[static_cast<std::size_t>(label)];
    return global;
  }
  // Ties decide member (the decision uses >= / <= in the member direction).
  int decide(double raw, int label) const {
    const double b = threshold_for(label);
    return (member_if_leq ? raw <= b : raw >= b) ? 1 : 0;
  }
};

// Exhaustive sweep over midpoints of the pooled sorted shadow scores,
// maximizing member/non-member accuracy; run globally and per class.
ThresholdRule select_threshold(std::span<const double> member_scores,
                               std::span<const int> member_labels,
                               std::span<const double> nonmember_scores,
                               std::span<const int> nonmember_labels, int n_classes,
                               AttackFamily family);

// Alternative rule: the top-t percentile of the shadow-test (non-member)
// scores in the member direction, globally.
ThresholdRule select_percentile_threshold(std::span<const double> nonmember_scores,
                                          double t, AttackFamily family);

// Single-threshold sweep used by both the rule above and its tests.
double best_accuracy_threshold(std::span<const double> member_scores,
                               std::span<const double> nonmember_scores, bool member_if_leq,
                               double* best_accuracy = nullptr);

AttackResult run_metric_attack(const TrainedModel& target, const Dataset& d,
                               const DataPartition& p, const AttackSpec& spec);

}  // namespace mia
