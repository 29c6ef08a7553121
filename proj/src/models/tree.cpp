#include "mia/models/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mia/rng.hpp"

namespace mia {

namespace {

double impurity(const std::vector<double>& counts, double total, bool entropy) {
  if (total <= 0.0) return 0.0;
  double value = entropy ? 0.0 : 1.0;
  for (double c : counts) {
    if (c <= 0.0) continue;
    const double p = c / total;
    if (entropy)
      value -= p * std::log2(p);
    else
      value -= p * p;
  }
  return value;
}

}  // namespace

void ClassificationTree::fit(const EncodedMatrix& data, std::span<const std::size_t> rows,
                             int n_classes, const Params& params, std::uint64_t seed) {
  if (rows.empty()) throw std::runtime_error("tree fit on empty row set");
  n_classes_ = n_classes;
  nodes_.clear();
  std::vector<std::size_t> work(rows.begin(), rows.end());
  Rng rng(seed);
  build(data, work, 0, work.size(), 0, params, rng);
  if (params.ccp_alpha > 0.0) prune(params.ccp_alpha, rows.size());
}

int ClassificationTree::build(const EncodedMatrix& data, std::vector<std::size_t>& rows,
                              std::size_t begin, std::size_t end, std::size_t depth,
                              const Params& params, Rng& rng) {
  const std::size_t n = end - begin;
  std::vector<double> counts(n_classes_, 0.0);
  for (std::size_t i = begin; i < end; ++i) counts[data.y[rows[i]]] += 1.0;

  const int node_id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  {
    Node& node = nodes_.back();
    node.n_samples = n;
    node.proba.resize(n_classes_);
    double best = 0.0;
    for (int k = 0; k < n_classes_; ++k) {
      node.proba[k] = counts[k] / static_cast<double>(n);
      best = std::max(best, counts[k]);
    }
    node.resub_error = (static_cast<double>(n) - best);
  }

  const double node_impurity = impurity(counts, static_cast<double>(n), params.entropy);
  const bool splittable = node_impurity > 0.0 && n >= params.min_samples_split &&
                          n >= 2 * params.min_samples_leaf &&
                          (params.max_depth == 0 || depth < params.max_depth);
  if (!splittable) return node_id;

  // Candidate features: all, or a per-split random subset (forests).
  std::vector<std::size_t> features(data.n_cols);
  std::iota(features.begin(), features.end(), 0);
  if (params.max_features > 0 && params.max_features < data.n_cols) {
    rng.shuffle(features);
    features.resize(params.max_features);
    std::sort(features.begin(), features.end());
  }

  int best_feature = -1;
  double best_threshold = 0.0;
  double best_score = std::numeric_limits<double>::infinity();

  std::vector<std::pair<double, int>> vals(n);
  std::vector<double> left_counts(n_classes_);
  for (std::size_t f : features) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = rows[begin + i];
      vals[i] = {data.x[r * data.n_cols + f], data.y[r]};
    }
    std::sort(vals.begin(), vals.end());
    if (vals.front().first == vals.back().first) continue;

    std::fill(left_counts.begin(), left_counts.end(), 0.0);
    double n_left = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_counts[vals[i].second] += 1.0;
      n_left += 1.0;
      if (vals[i].first == vals[i + 1].first) continue;
      const double n_right = static_cast<double>(n) - n_left;
      if (n_left < params.min_samples_leaf || n_right < params.min_samples_leaf) continue;
      double score = n_left * impurity(left_counts, n_left, params.entropy);
      std::vector<double> right_counts(n_classes_);
      for (int k = 0; k < n_classes_; ++k) right_counts[k] = counts[k] - left_counts[k];
      score += n_right * impurity(right_counts, n_right, params.entropy);
      if (score < best_score - 1e-12) {
        best_score = score;
        best_feature = static_cast<int>(f);
        best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
      }
    }
  }
  // Zero-improvement splits are allowed (children strictly shrink, so the
  // recursion terminates); this is what lets an unbounded tree reach purity
  // on data like XOR where no single split helps immediately.
  if (best_feature < 0) return node_id;

  const auto mid = std::partition(rows.begin() + begin, rows.begin() + end,
                                  [&](std::size_t r) {
                                    return data.x[r * data.n_cols + best_feature] <=
                                           best_threshold;
                                  });
  const std::size_t split = static_cast<std::size_t>(mid - rows.begin());
  if (split == begin || split == end) return node_id;  // numeric degeneracy guard

  const int left = build(data, rows, begin, split, depth + 1, params, rng);
  const int right = build(data, rows, split, end, depth + 1, params, rng);
  nodes_[node_id].feature = best_feature;
  nodes_[node_id].threshold = best_threshold;
  nodes_[node_id].left = left;
  nodes_[node_id].right = right;
  return node_id;
}

void ClassificationTree::prune(double ccp_alpha, std::size_t n_total) {
  // Weakest-link pruning: repeatedly collapse the internal node whose
  // effective alpha is smallest, while that alpha stays within ccp_alpha.
  const double total = static_cast<double>(n_total);
  while (true) {
    // subtree error and leaf count per node (nodes are in pre-order, so a
    // reverse scan visits children first)
    std::vector<double> sub_err(nodes_.size());
    std::vector<std::size_t> sub_leaves(nodes_.size());
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      const Node& nd = nodes_[i];
      if (nd.feature < 0) {
        sub_err[i] = nd.resub_error;
        sub_leaves[i] = 1;
      } else {
        sub_err[i] = sub_err[nd.left] + sub_err[nd.right];
        sub_leaves[i] = sub_leaves[nd.left] + sub_leaves[nd.right];
      }
    }
    int weakest = -1;
    double weakest_alpha = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].feature < 0) continue;
      const double alpha =
          (nodes_[i].resub_error - sub_err[i]) / (total * static_cast<double>(sub_leaves[i] - 1));
      if (alpha < weakest_alpha) {
        weakest_alpha = alpha;
        weakest = static_cast<int>(i);
      }
    }
    if (weakest < 0 || weakest_alpha > ccp_alpha) break;
    nodes_[weakest].feature = -1;
    nodes_[weakest].left = -1;
    nodes_[weakest].right = -1;
  }
}

std::vector<double> ClassificationTree::predict_proba(std::span<const double> x) const {
  int i = 0;
  while (nodes_[i].feature >= 0)
    i = x[nodes_[i].feature] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
  return nodes_[i].proba;
}

nlohmann::json ClassificationTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const Node& n : nodes_) {
    nodes.push_back({{"f", n.feature},
                     {"t", n.threshold},
                     {"l", n.left},
                     {"r", n.right},
                     {"p", n.proba},
                     {"e", n.resub_error},
                     {"n", n.n_samples}});
  }
  return {{"n_classes", n_classes_}, {"nodes", nodes}};
}

ClassificationTree ClassificationTree::from_json(const nlohmann::json& j) {
  ClassificationTree t;
  t.n_classes_ = j.at("n_classes").get<int>();
  for (const auto& nj : j.at("nodes")) {
    Node n;
    n.feature = nj.at("f").get<int>();
    n.threshold = nj.at("t").get<double>();
    n.left = nj.at("l").get<int>();
    n.right = nj.at("r").get<int>();
    n.proba = nj.at("p").get<std::vector<double>>();
    n.resub_error = nj.at("e").get<double>();
    n.n_samples = nj.at("n").get<std::size_t>();
    t.nodes_.push_back(std::move(n));
  }
  return t;
}

}  // namespace mia
