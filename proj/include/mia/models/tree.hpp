#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "mia/encode.hpp"

namespace mia {

// CART classification tree over the encoded feature matrix. Used directly as
// the decision-tree model and as the forest's base learner.
class ClassificationTree {
 public:
  struct Params {
    bool entropy = false;  // false -> gini
    std::size_t max_depth = 0;  // 0 = unbounded
    std::size_t min_samples_leaf = 1;
    std::size_t min_samples_split = 2;
    std::size_t max_features = 0;  // 0 = all features, else per-split subset size
    double ccp_alpha = 0.0;
  };

  void fit(const EncodedMatrix& data, std::span<const std::size_t> rows, int n_classes,
           const Params& params, std::uint64_t seed);

  // Class distribution at the reached leaf.
  std::vector<double> predict_proba(std::span<const double> x) const;

  nlohmann::json to_json() const;
  static ClassificationTree from_json(const nlohmann::json& j);

  std::size_t n_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    int feature = -1;  // -1 for leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> proba;
    // pruning bookkeeping
    double resub_error = 0.0;  // weighted misclassification of this node as a leaf
    std::size_t n_samples = 0;
  };
  std::vector<Node> nodes_;
  int n_classes_ = 0;

  int build(const EncodedMatrix& data, std::vector<std::size_t>& rows, std::size_t begin,
            std::size_t end, std::size_t depth, const Params& params, class Rng& rng);
  void prune(double ccp_alpha, std::size_t n_total);
};

}  // namespace mia
