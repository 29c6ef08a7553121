#include "mia/attacks/shadow.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace mia {

namespace {

std::string class_category(int c) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "c%05d", c);
  return buf;
}

Column class_column(const std::string& name, std::vector<int> codes, int n_classes) {
  Column col;
  col.schema.name = name;
  col.schema.kind = ColumnKind::categorical;
  col.schema.categories.reserve(static_cast<std::size_t>(n_classes));
  for (int c = 0; c < n_classes; ++c) col.schema.categories.push_back(class_category(c));
  col.cat = std::move(codes);
  return col;
}

std::vector<double> top_probs(std::span<const double> p, int k) {
  std::vector<double> sorted(p.begin(), p.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  sorted.resize(static_cast<std::size_t>(k));
  return sorted;
}

Dataset assemble_attack_rows(const std::vector<std::vector<double>>& proba,
                             const std::vector<int>& labels, const std::vector<int>& member,
                             ShadowMode mode, int top_k, int n_classes,
                             const std::string& name) {
  const std::size_t n = proba.size();
  std::vector<Column> cols;
  if (mode == ShadowMode::probabilities) {
    for (int j = 0; j < top_k; ++j) {
      Column c;
      c.schema.name = "p" + std::to_string(j + 1);
      c.schema.kind = ColumnKind::numeric;
      c.num.resize(n);
      cols.push_back(std::move(c));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::vector<double> top = top_probs(proba[i], top_k);
      for (int j = 0; j < top_k; ++j) cols[static_cast<std::size_t>(j)].num[i] = top[j];
    }
  } else {
    std::vector<int> predicted(n);
    for (std::size_t i = 0; i < n; ++i) predicted[i] = argmax_class(proba[i]);
    cols.push_back(class_column("predicted", std::move(predicted), n_classes));
  }
  cols.push_back(class_column("label", labels, n_classes));
  cols.push_back(class_column("member", member, 2));
  const std::size_t label_col = cols.size() - 1;
  return Dataset(name, std::move(cols), label_col);
}

}  // namespace

ShadowSplit make_shadow_split(const DataPartition& p, Rng& rng) {
  ShadowSplit out;
  std::size_t want_train = p.target_train.size();
  std::size_t want_test = p.target_test.size();
  const std::size_t avail = p.population.size();
  if (avail < 2) throw std::runtime_error("population too small for a shadow split");
  if (want_train + want_test > avail) {
    const double scale =
        static_cast<double>(avail) / static_cast<double>(want_train + want_test);
    want_train = std::max<std::size_t>(1, static_cast<std::size_t>(
                                              static_cast<double>(want_train) * scale));
    want_test = std::max<std::size_t>(1, avail - want_train);
    if (want_train + want_test > avail) want_train = avail - want_test;
    out.shrunk = true;
  }
  std::vector<std::size_t> pool = p.population;
  rng.shuffle(pool);
  out.train.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(want_train));
  out.test.assign(pool.begin() + static_cast<std::ptrdiff_t>(want_train),
                  pool.begin() + static_cast<std::ptrdiff_t>(want_train + want_test));
  return out;
}

Dataset build_shadow_attack_dataset(const TrainedModel& shadow, const Dataset& d,
                                    std::span<const std::size_t> shadow_train,
                                    std::span<const std::size_t> shadow_test, ShadowMode mode,
                                    int top_k) {
  if (shadow_train.empty() || shadow_test.empty())
    throw std::runtime_error("shadow split has an empty side");
  const int n_classes = d.n_classes();
  if (top_k > n_classes) top_k = n_classes;
  std::vector<std::vector<double>> proba;
  std::vector<int> labels;
  std::vector<int> member;
  proba.reserve(shadow_train.size() + shadow_test.size());
  for (int side = 0; side < 2; ++side) {
    const auto rows = side == 0 ? shadow_train : shadow_test;
    for (std::size_t r : rows) {
      proba.push_back(shadow.predict_row(d, r));
      labels.push_back(d.label(r));
      member.push_back(side == 0 ? 1 : 0);
    }
  }
  return assemble_attack_rows(proba, labels, member, mode, top_k, n_classes, "attack_train");
}

Dataset build_attack_query_dataset(const QueryCache& q, ShadowMode mode, int top_k,
                                   int n_classes) {
  if (top_k > n_classes) top_k = n_classes;
  return assemble_attack_rows(q.proba, q.labels, q.truth, mode, top_k, n_classes,
                              "attack_queries");
}

AttackResult run_shadow_attack(const TrainedModel& target, const Dataset& d,
                               const DataPartition& p, const AttackSpec& spec) {
  const ShadowMode mode = spec.family == AttackFamily::shadow_predictions
                              ? ShadowMode::predictions
                              : ShadowMode::probabilities;
  if (spec.family != AttackFamily::shadow_predictions &&
      spec.family != AttackFamily::shadow_probabilities)
    throw std::runtime_error("not a shadow attack family: " + family_name(spec.family));

  Rng rng(derive_seed(spec.seed, 0));
  const ShadowSplit ss = make_shadow_split(p, rng);

  ModelSpec shadow_spec;
  shadow_spec.kind = spec.surrogate_kind;
  shadow_spec.seed = derive_seed(spec.seed, 1);
  const TrainedModel shadow = train_model(shadow_spec, d, ss.train);

  const int top_k = resolve_top_k(spec, d.n_classes());
  const Dataset attack_data =
      build_shadow_attack_dataset(shadow, d, ss.train, ss.test, mode, top_k);

  ModelSpec attack_spec;
  attack_spec.kind = spec.attack_model_kind.value_or(spec.surrogate_kind);
  attack_spec.seed = derive_seed(spec.seed, 2);
  std::vector<std::size_t> all_rows(attack_data.n_rows());
  std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
  const TrainedModel attack_model = train_model(attack_spec, attack_data, all_rows);

  const QueryCache q = make_query_cache(target, d, p);
  const Dataset queries = build_attack_query_dataset(q, mode, top_k, d.n_classes());

  AttackResult r;
  r.family = spec.family;
  r.seed = spec.seed;
  r.record_index = q.rows;
  r.truth = q.truth;
  r.score.reserve(q.size());
  r.predicted.reserve(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const std::vector<double> mp = attack_model.predict_row(queries, i);
    const double member_prob = mp.size() > 1 ? mp[1] : mp[0];
    r.score.push_back(member_prob);
    r.predicted.push_back(member_prob >= 0.5 ? 1 : 0);
  }
  return r;
}

}  // namespace mia
