#include "mia/models/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mia/rng.hpp"

namespace mia {

GbtModel::Params GbtModel::params_from_spec(const ModelSpec& spec) {
  Params p;
  p.n_estimators = static_cast<std::size_t>(spec.num("n_estimators", 100));
  p.max_depth = static_cast<std::size_t>(spec.num("max_depth", 6));
  p.min_child_weight = spec.num("min_child_weight", 1.0);
  p.subsample = spec.num("subsample", 1.0);
  p.colsample_bytree = spec.num("colsample_bytree", 1.0);
  p.learning_rate = spec.num("learning_rate", 0.3);
  p.gamma = spec.num("gamma", 0.0);
  p.reg_alpha = spec.num("reg_alpha", 0.0);
  p.reg_lambda = spec.num("reg_lambda", 1.0);
  p.early_stopping_rounds = static_cast<std::size_t>(spec.num("early_stopping_rounds", 0));
  return p;
}

std::unique_ptr<GbtModel> GbtModel::make(const Params& params, const EncodedMatrix& prior_data,
                                         int n_classes, std::uint64_t seed) {
  if (prior_data.n_rows == 0) throw std::runtime_error("gbt fit on empty data");
  auto m = std::make_unique<GbtModel>();
  m->params_ = params;
  m->n_classes_ = n_classes;
  m->seed_ = seed;
  // Prior logits from the class frequencies; with zero rounds the model is a
  // constant prior predictor.
  std::vector<double> counts(n_classes, 0.0);
  for (int y : prior_data.y) counts[y] += 1.0;
  m->base_score_.resize(n_classes);
  for (int k = 0; k < n_classes; ++k)
    m->base_score_[k] =
        std::log(std::max(counts[k], kProbFloor) / static_cast<double>(prior_data.n_rows));
  return m;
}

std::unique_ptr<GbtModel> GbtModel::fit(const ModelSpec& spec, const EncodedMatrix& train,
                                        int n_classes, const EncodedMatrix* validation) {
  const Params params = params_from_spec(spec);
  auto m = make(params, train, n_classes, spec.seed);
  if (params.early_stopping_rounds > 0) {
    if (!validation || validation->n_rows == 0)
      throw std::runtime_error("early stopping requires a validation set");
    m->boost_early_stop(train, *validation, spec.seed);
  } else {
    m->boost_rounds(train, params.n_estimators, spec.seed);
  }
  return m;
}

double GbtModel::leaf_weight(double g, double h) const {
  const double a = params_.reg_alpha;
  double gs = g > a ? g - a : (g < -a ? g + a : 0.0);
  return -gs / (h + params_.reg_lambda);
}

namespace {
// alpha-thresholded score used in the split gain
double reg_score(double g, double h, double alpha, double lambda) {
  const double gs = g > alpha ? g - alpha : (g < -alpha ? g + alpha : 0.0);
  return gs * gs / (h + lambda);
}
}  // namespace

int GbtModel::build_node(RegTree& tree, const EncodedMatrix& data, std::vector<std::size_t>& rows,
                         std::size_t begin, std::size_t end, std::size_t depth,
                         const std::vector<std::size_t>& features, const std::vector<double>& grad,
                         const std::vector<double>& hess) const {
  double g_sum = 0.0, h_sum = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    g_sum += grad[rows[i]];
    h_sum += hess[rows[i]];
  }

  const int node_id = static_cast<int>(tree.size());
  tree.emplace_back();
  tree.back().value = params_.learning_rate * leaf_weight(g_sum, h_sum);

  const std::size_t n = end - begin;
  if (depth >= params_.max_depth || n < 2) return node_id;

  const double parent_score = reg_score(g_sum, h_sum, params_.reg_alpha, params_.reg_lambda);
  int best_feature = -1;
  double best_threshold = 0.0;
  double best_gain = 0.0;

  std::vector<std::pair<double, std::size_t>> vals(n);
  for (std::size_t f : features) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = rows[begin + i];
      vals[i] = {data.x[r * data.n_cols + f], r};
    }
    std::sort(vals.begin(), vals.end());
    if (vals.front().first == vals.back().first) continue;
    double gl = 0.0, hl = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      gl += grad[vals[i].second];
      hl += hess[vals[i].second];
      if (vals[i].first == vals[i + 1].first) continue;
      const double gr = g_sum - gl;
      const double hr = h_sum - hl;
      if (hl < params_.min_child_weight || hr < params_.min_child_weight) continue;
      const double gain = 0.5 * (reg_score(gl, hl, params_.reg_alpha, params_.reg_lambda) +
                                 reg_score(gr, hr, params_.reg_alpha, params_.reg_lambda) -
                                 parent_score) -
                          params_.gamma;
      if (gain > best_gain + 1e-12) {
        best_gain = gain;
        best_feature = static_cast<int>(f);
        best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
      }
    }
  }
  if (best_feature < 0) return node_id;

  const auto mid = std::partition(rows.begin() + begin, rows.begin() + end, [&](std::size_t r) {
    return data.x[r * data.n_cols + best_feature] <= best_threshold;
  });
  const std::size_t split = static_cast<std::size_t>(mid - rows.begin());
  if (split == begin || split == end) return node_id;

  const int left = build_node(tree, data, rows, begin, split, depth + 1, features, grad, hess);
  const int right = build_node(tree, data, rows, split, end, depth + 1, features, grad, hess);
  tree[node_id].feature = best_feature;
  tree[node_id].threshold = best_threshold;
  tree[node_id].left = left;
  tree[node_id].right = right;
  return node_id;
}

GbtModel::RegTree GbtModel::build_tree(const EncodedMatrix& data,
                                       const std::vector<std::size_t>& rows,
                                       const std::vector<std::size_t>& features,
                                       const std::vector<double>& grad,
                                       const std::vector<double>& hess) const {
  RegTree tree;
  std::vector<std::size_t> work = rows;
  build_node(tree, data, work, 0, work.size(), 0, features, grad, hess);
  return tree;
}

void GbtModel::append_round(const EncodedMatrix& data, std::vector<double>& margins,
                            Rng& round_rng) {
  const std::size_t n = data.n_rows;

  std::vector<std::size_t> row_sample(n);
  std::iota(row_sample.begin(), row_sample.end(), 0);
  if (params_.subsample < 1.0) {
    round_rng.derive(0).shuffle(row_sample);
    row_sample.resize(std::max<std::size_t>(
        1, static_cast<std::size_t>(params_.subsample * static_cast<double>(n))));
    std::sort(row_sample.begin(), row_sample.end());
  }

  trees_.emplace_back();
  std::vector<RegTree>& round_trees = trees_.back();
  round_trees.resize(n_classes_);

  // per-row softmax under current margins
  std::vector<double> probs(n * n_classes_);
  for (std::size_t r = 0; r < n; ++r) {
    const double* m = margins.data() + r * n_classes_;
    double mx = m[0];
    for (int k = 1; k < n_classes_; ++k) mx = std::max(mx, m[k]);
    double sum = 0.0;
    for (int k = 0; k < n_classes_; ++k) {
      probs[r * n_classes_ + k] = std::exp(m[k] - mx);
      sum += probs[r * n_classes_ + k];
    }
    for (int k = 0; k < n_classes_; ++k) probs[r * n_classes_ + k] /= sum;
  }

  std::vector<double> grad(n), hess(n);
  for (int k = 0; k < n_classes_; ++k) {
    std::vector<std::size_t> features(data.n_cols);
    std::iota(features.begin(), features.end(), 0);
    if (params_.colsample_bytree < 1.0) {
      Rng col_rng = round_rng.derive(100 + k);
      col_rng.shuffle(features);
      features.resize(std::max<std::size_t>(
          1,
          static_cast<std::size_t>(params_.colsample_bytree * static_cast<double>(data.n_cols))));
      std::sort(features.begin(), features.end());
    }
    for (std::size_t r = 0; r < n; ++r) {
      const double pk = probs[r * n_classes_ + k];
      grad[r] = pk - (data.y[r] == k ? 1.0 : 0.0);
      hess[r] = std::max(pk * (1.0 - pk), 1e-16);
    }
    round_trees[k] = build_tree(data, row_sample, features, grad, hess);
  }
  add_round_to_margins(round_trees, data, margins);
}

void GbtModel::add_round_to_margins(const std::vector<RegTree>& round_trees,
                                    const EncodedMatrix& data,
                                    std::vector<double>& margins) const {
  for (std::size_t r = 0; r < data.n_rows; ++r) {
    for (int k = 0; k < n_classes_; ++k) {
      const RegTree& t = round_trees[k];
      int i = 0;
      while (t[i].feature >= 0)
        i = data.x[r * data.n_cols + t[i].feature] <= t[i].threshold ? t[i].left : t[i].right;
      margins[r * n_classes_ + k] += t[i].value;
    }
  }
}

std::vector<double> GbtModel::current_margins(const EncodedMatrix& data) const {
  std::vector<double> margins(data.n_rows * n_classes_);
  for (std::size_t r = 0; r < data.n_rows; ++r)
    raw_scores({data.x.data() + r * data.n_cols, data.n_cols}, margins.data() + r * n_classes_);
  return margins;
}

void GbtModel::boost_rounds(const EncodedMatrix& data, std::size_t rounds, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> margins = current_margins(data);
  for (std::size_t round = 0; round < rounds; ++round) {
    Rng round_rng = rng.derive(round);
    append_round(data, margins, round_rng);
  }
}

void GbtModel::boost_early_stop(const EncodedMatrix& train, const EncodedMatrix& validation,
                                std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> train_margins = current_margins(train);
  std::vector<double> val_margins = current_margins(validation);

  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t best_rounds = trees_.size();
  for (std::size_t round = 0; round < params_.n_estimators; ++round) {
    Rng round_rng = rng.derive(round);
    append_round(train, train_margins, round_rng);
    add_round_to_margins(trees_.back(), validation, val_margins);

    double loss = 0.0;
    for (std::size_t r = 0; r < validation.n_rows; ++r) {
      const double* m = val_margins.data() + r * n_classes_;
      double mx = m[0];
      for (int k = 1; k < n_classes_; ++k) mx = std::max(mx, m[k]);
      double sum = 0.0;
      for (int k = 0; k < n_classes_; ++k) sum += std::exp(m[k] - mx);
      loss -= m[validation.y[r]] - mx - std::log(sum);
    }
    loss /= static_cast<double>(validation.n_rows);

    if (loss < best_loss - 1e-12) {
      best_loss = loss;
      best_rounds = trees_.size();
    } else if (trees_.size() - best_rounds >= params_.early_stopping_rounds) {
      break;
    }
  }
  truncate_rounds(best_rounds);
}

void GbtModel::truncate_rounds(std::size_t rounds) {
  if (rounds < trees_.size()) trees_.resize(rounds);
}

void GbtModel::raw_scores(std::span<const double> x, double* out) const {
  for (int k = 0; k < n_classes_; ++k) out[k] = base_score_[k];
  for (const auto& round_trees : trees_) {
    for (int k = 0; k < n_classes_; ++k) {
      const RegTree& t = round_trees[k];
      int i = 0;
      while (t[i].feature >= 0)
        i = x[t[i].feature] <= t[i].threshold ? t[i].left : t[i].right;
      out[k] += t[i].value;
    }
  }
}

std::vector<double> GbtModel::predict_proba(std::span<const double> x) const {
  std::vector<double> out(n_classes_);
  raw_scores(x, out.data());
  double mx = out[0];
  for (int k = 1; k < n_classes_; ++k) mx = std::max(mx, out[k]);
  double sum = 0.0;
  for (int k = 0; k < n_classes_; ++k) {
    out[k] = std::exp(out[k] - mx);
    sum += out[k];
  }
  for (int k = 0; k < n_classes_; ++k) out[k] /= sum;
  return out;
}

double GbtModel::log_loss(const EncodedMatrix& data) const {
  double loss = 0.0;
  for (std::size_t r = 0; r < data.n_rows; ++r) {
    auto p = predict_proba({data.x.data() + r * data.n_cols, data.n_cols});
    loss -= std::log(std::max(p[data.y[r]], kProbFloor));
  }
  return loss / static_cast<double>(data.n_rows);
}

nlohmann::json GbtModel::to_json() const {
  nlohmann::json rounds = nlohmann::json::array();
  for (const auto& round_trees : trees_) {
    nlohmann::json rj = nlohmann::json::array();
    for (const RegTree& t : round_trees) {
      nlohmann::json tj = nlohmann::json::array();
      for (const RegNode& nd : t)
        tj.push_back({{"f", nd.feature},
                      {"t", nd.threshold},
                      {"l", nd.left},
                      {"r", nd.right},
                      {"v", nd.value}});
      rj.push_back(std::move(tj));
    }
    rounds.push_back(std::move(rj));
  }
  return {{"type", "gradient_boosted_trees"},
          {"n_classes", n_classes_},
          {"base_score", base_score_},
          {"learning_rate", params_.learning_rate},
          {"rounds", rounds}};
}

std::unique_ptr<GbtModel> GbtModel::from_json(const nlohmann::json& j) {
  auto m = std::make_unique<GbtModel>();
  m->n_classes_ = j.at("n_classes").get<int>();
  m->base_score_ = j.at("base_score").get<std::vector<double>>();
  m->params_.learning_rate = j.at("learning_rate").get<double>();
  for (const auto& rj : j.at("rounds")) {
    std::vector<RegTree> round_trees;
    for (const auto& tj : rj) {
      RegTree t;
      for (const auto& nj : tj) {
        RegNode nd;
        nd.feature = nj.at("f").get<int>();
        nd.threshold = nj.at("t").get<double>();
        nd.left = nj.at("l").get<int>();
        nd.right = nj.at("r").get<int>();
        nd.value = nj.at("v").get<double>();
        t.push_back(nd);
      }
      round_trees.push_back(std::move(t));
    }
    m->trees_.push_back(std::move(round_trees));
  }
  return m;
}

}  // namespace mia
