#pragma once

#include "mia/model.hpp"

namespace mia {

// Second-order boosted regression trees with a softmax objective: one tree
// per class per round, split gain and leaf weights in the XGBoost form
// (min_child_weight, gamma, reg_alpha, reg_lambda, subsample, colsample).
class GbtModel : public Model {
 public:
  struct Params {
    std::size_t n_estimators = 100;
    std::size_t max_depth = 6;
    double min_child_weight = 1.0;
    double subsample = 1.0;
    double colsample_bytree = 1.0;
    double learning_rate = 0.3;
    double gamma = 0.0;
    double reg_alpha = 0.0;
    double reg_lambda = 1.0;
    std::size_t early_stopping_rounds = 0;  // 0 = off; needs validation data
  };
  static Params params_from_spec(const ModelSpec& spec);

  static std::unique_ptr<GbtModel> fit(const ModelSpec& spec, const EncodedMatrix& train,
                                       int n_classes, const EncodedMatrix* validation);

  // Starts from prior-only; the federated cyclic-boosting loop appends rounds.
  static std::unique_ptr<GbtModel> make(const Params& params, const EncodedMatrix& prior_data,
                                        int n_classes, std::uint64_t seed);

  // Appends `rounds` boosting rounds fitted against the current ensemble's
  // residuals on `data`.
  void boost_rounds(const EncodedMatrix& data, std::size_t rounds, std::uint64_t seed);

  // Boosts up to n_estimators rounds, stopping when validation log-loss has
  // not improved for early_stopping_rounds rounds; keeps the best prefix.
  void boost_early_stop(const EncodedMatrix& train, const EncodedMatrix& validation,
                        std::uint64_t seed);

  std::vector<double> predict_proba(std::span<const double> x) const override;
  double log_loss(const EncodedMatrix& data) const;
  std::size_t n_rounds() const { return trees_.size(); }
  void truncate_rounds(std::size_t rounds);

  nlohmann::json to_json() const override;
  static std::unique_ptr<GbtModel> from_json(const nlohmann::json& j);

 private:
  struct RegNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  using RegTree = std::vector<RegNode>;

  Params params_;
  std::vector<double> base_score_;          // per-class prior logits
  std::vector<std::vector<RegTree>> trees_; // [round][class]
  std::uint64_t seed_ = 0;

  void raw_scores(std::span<const double> x, double* out) const;
  void append_round(const EncodedMatrix& data, std::vector<double>& margins, class Rng& round_rng);
  void add_round_to_margins(const std::vector<RegTree>& round_trees, const EncodedMatrix& data,
                            std::vector<double>& margins) const;
  std::vector<double> current_margins(const EncodedMatrix& data) const;
  RegTree build_tree(const EncodedMatrix& data, const std::vector<std::size_t>& rows,
                     const std::vector<std::size_t>& features, const std::vector<double>& grad,
                     const std::vector<double>& hess) const;
  int build_node(RegTree& tree, const EncodedMatrix& data, std::vector<std::size_t>& rows,
                 std::size_t begin, std::size_t end, std::size_t depth,
                 const std::vector<std::size_t>& features, const std::vector<double>& grad,
                 const std::vector<double>& hess) const;
  double leaf_weight(double g, double h) const;
};

}  // namespace mia
