#pragma once

#include "mia/model.hpp"

namespace mia {

// Gaussian per numeric feature, smoothed category frequencies per one-hot
// block, log-prior class weighting.
class NaiveBayesModel : public Model {
 public:
  static std::unique_ptr<NaiveBayesModel> fit(const ModelSpec& spec, const EncodedMatrix& train,
                                              const std::vector<ColumnExpansion>& expansions,
                                              int n_classes);

  std::vector<double> predict_proba(std::span<const double> x) const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<NaiveBayesModel> from_json(const nlohmann::json& j);

 private:
  struct NumericFeature {
    std::size_t col;
    std::vector<double> mean;  // per class
    std::vector<double> var;
  };
  struct BlockFeature {
    std::size_t start;
    std::size_t len;
    std::vector<double> log_prob;  // class-major [class * len + category]
    std::vector<double> log_unseen;  // per class, for all-zero blocks
  };
  std::vector<double> log_prior_;
  std::vector<NumericFeature> numeric_;
  std::vector<BlockFeature> blocks_;
};

}  // namespace mia
