#include "mia/models/forest.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mia/rng.hpp"

namespace mia {

ClassificationTree::Params DecisionTreeModel::tree_params(const ModelSpec& spec) {
  ClassificationTree::Params p;
  p.entropy = spec.str("criterion", "gini") == "entropy";
  p.max_depth = static_cast<std::size_t>(spec.num("max_depth", 0));
  p.min_samples_leaf = static_cast<std::size_t>(spec.num("min_samples_leaf", 1));
  p.min_samples_split = static_cast<std::size_t>(spec.num("min_samples_split", 2));
  p.ccp_alpha = spec.num("ccp_alpha", 0.0);
  return p;
}

std::unique_ptr<DecisionTreeModel> DecisionTreeModel::fit(const ModelSpec& spec,
                                                          const EncodedMatrix& train,
                                                          int n_classes) {
  auto m = std::make_unique<DecisionTreeModel>();
  m->n_classes_ = n_classes;
  std::vector<std::size_t> rows(train.n_rows);
  std::iota(rows.begin(), rows.end(), 0);
  m->tree_.fit(train, rows, n_classes, tree_params(spec), spec.seed);
  return m;
}

std::vector<double> DecisionTreeModel::predict_proba(std::span<const double> x) const {
  return tree_.predict_proba(x);
}

nlohmann::json DecisionTreeModel::to_json() const {
  return {{"type", "decision_tree"}, {"n_classes", n_classes_}, {"tree", tree_.to_json()}};
}

std::unique_ptr<DecisionTreeModel> DecisionTreeModel::from_json(const nlohmann::json& j) {
  auto m = std::make_unique<DecisionTreeModel>();
  m->n_classes_ = j.at("n_classes").get<int>();
  m->tree_ = ClassificationTree::from_json(j.at("tree"));
  return m;
}

std::unique_ptr<RandomForestModel> RandomForestModel::fit(const ModelSpec& spec,
                                                          const EncodedMatrix& train,
                                                          int n_classes) {
  auto m = std::make_unique<RandomForestModel>();
  m->n_classes_ = n_classes;

  ClassificationTree::Params params = DecisionTreeModel::tree_params(spec);
  const double max_features = spec.num("max_features", 0.0);  // 0 / "None" = all
  if (max_features > 0.0)
    params.max_features = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(max_features * static_cast<double>(train.n_cols))));

  const std::size_t n_estimators = static_cast<std::size_t>(spec.num("n_estimators", 100));
  if (n_estimators < 1) throw std::runtime_error("random forest needs n_estimators >= 1");

  Rng rng(spec.seed);
  for (std::size_t t = 0; t < n_estimators; ++t) {
    Rng tree_rng = rng.derive(t);
    std::vector<std::size_t> sample(train.n_rows);
    for (std::size_t i = 0; i < train.n_rows; ++i)
      sample[i] = tree_rng.next_index(train.n_rows);  // bootstrap
    ClassificationTree tree;
    tree.fit(train, sample, n_classes, params, tree_rng.derive(1).seed());
    m->trees_.push_back(std::move(tree));
  }
  return m;
}

std::vector<double> RandomForestModel::predict_proba(std::span<const double> x) const {
  std::vector<double> acc(n_classes_, 0.0);
  for (const ClassificationTree& t : trees_) {
    const auto p = t.predict_proba(x);
    for (int k = 0; k < n_classes_; ++k) acc[k] += p[k];
  }
  for (double& v : acc) v /= static_cast<double>(trees_.size());
  return acc;
}

nlohmann::json RandomForestModel::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const ClassificationTree& t : trees_) trees.push_back(t.to_json());
  return {{"type", "random_forest"}, {"n_classes", n_classes_}, {"trees", trees}};
}

std::unique_ptr<RandomForestModel> RandomForestModel::from_json(const nlohmann::json& j) {
  auto m = std::make_unique<RandomForestModel>();
  m->n_classes_ = j.at("n_classes").get<int>();
  for (const auto& tj : j.at("trees")) m->trees_.push_back(ClassificationTree::from_json(tj));
  return m;
}

}  // namespace mia
