#pragma once

#include "mia/model.hpp"
#include "mia/models/tree.hpp"

namespace mia {

// Bootstrap-aggregated CART trees with per-split feature subsets and soft
// (mean leaf distribution) voting.
class RandomForestModel : public Model {
 public:
  static std::unique_ptr<RandomForestModel> fit(const ModelSpec& spec, const EncodedMatrix& train,
                                                int n_classes);

  std::vector<double> predict_proba(std::span<const double> x) const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<RandomForestModel> from_json(const nlohmann::json& j);

 private:
  std::vector<ClassificationTree> trees_;
};

// Plain decision tree behind the Model interface.
class DecisionTreeModel : public Model {
 public:
  static std::unique_ptr<DecisionTreeModel> fit(const ModelSpec& spec, const EncodedMatrix& train,
                                                int n_classes);

  std::vector<double> predict_proba(std::span<const double> x) const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<DecisionTreeModel> from_json(const nlohmann::json& j);

  static ClassificationTree::Params tree_params(const ModelSpec& spec);

 private:
  ClassificationTree tree_;
};

}  // namespace mia
