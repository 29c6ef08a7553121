#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mia/attacks/lira.hpp"
#include "mia/attacks/metric.hpp"
#include "mia/attacks/refpool.hpp"
#include "mia/attacks/rmia.hpp"
#include "mia/attacks/run.hpp"
#include "mia/attacks/shadow.hpp"
#include "mia/eval.hpp"
#include "mia/rng.hpp"
#include "mia/synthetic.hpp"

using namespace mia;

namespace {

std::vector<double> random_simplex(Rng& rng, std::size_t k) {
  std::vector<double> p(k);
  double sum = 0.0;
  for (double& v : p) {
    v = -std::log(std::max(rng.next_double(), 1e-300));
    sum += v;
  }
  for (double& v : p) v /= sum;
  return p;
}

// Independent single-expression re-implementations of the four statistics.
double oracle_correctness(const std::vector<double>& p, int y) {
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > p[static_cast<std::size_t>(y)]) return 0.0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(y); ++i)
    if (p[i] == p[static_cast<std::size_t>(y)]) return 0.0;  // argmax tie-break low
  return 1.0;
}
double oracle_loss(const std::vector<double>& p, int y) {
  return -std::log(std::max(p[static_cast<std::size_t>(y)], 1e-12));
}
double oracle_confidence(const std::vector<double>& p) {
  return *std::max_element(p.begin(), p.end());
}
double oracle_mentropy(const std::vector<double>& p, int y) {
  const double py = std::max(p[static_cast<std::size_t>(y)], 1e-12);
  double s = -(1.0 - py) * std::log(py);
  for (std::size_t i = 0; i < p.size(); ++i)
    if (static_cast<int>(i) != y) s -= p[i] * std::log(std::max(1.0 - p[i], 1e-12));
  return s;
}

}  // namespace

TEST_CASE("metric statistics match brute-force formulas on random simplexes") {
  Rng rng(99);
  double worst = 0.0;
  for (int t = 0; t < 100000; ++t) {
    const std::size_t k = 2 + rng.next_index(5);
    const auto p = random_simplex(rng, k);
    const int y = static_cast<int>(rng.next_index(k));
    worst = std::max(worst, std::abs(metric_score(p, y, AttackFamily::metric_correctness) -
                                     oracle_correctness(p, y)));
    worst = std::max(worst, std::abs(metric_score(p, y, AttackFamily::metric_loss) -
                                     oracle_loss(p, y)));
    worst = std::max(worst, std::abs(metric_score(p, y, AttackFamily::metric_confidence) -
                                     oracle_confidence(p)));
    worst = std::max(
        worst, std::abs(metric_score(p, y, AttackFamily::metric_modified_entropy) -
                        oracle_mentropy(p, y)));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("metric corner cases") {
  std::vector<double> onehot = {1.0, 0.0};
  CHECK(metric_score(onehot, 0, AttackFamily::metric_loss) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(metric_score(onehot, 0, AttackFamily::metric_modified_entropy) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(metric_score(onehot, 0, AttackFamily::metric_correctness) == 1.0);
  CHECK(metric_score(onehot, 0, AttackFamily::metric_confidence) == 1.0);
  std::vector<double> half = {0.5, 0.5};
  CHECK(metric_score(half, 0, AttackFamily::metric_loss) ==
        doctest::Approx(std::log(2.0)));
  CHECK(metric_score(half, 0, AttackFamily::metric_modified_entropy) ==
        doctest::Approx(std::log(2.0)));
  std::vector<double> wrong = {0.0, 1.0};
  CHECK(metric_score(wrong, 0, AttackFamily::metric_correctness) == 0.0);
  CHECK(std::isfinite(metric_score(wrong, 0, AttackFamily::metric_loss)));
}

TEST_CASE("logit confidence examples") {
  std::vector<double> p = {0.5, 0.5};
  CHECK(logit_confidence(p, 0) == doctest::Approx(0.0));
  p = {0.1, 0.9};
  CHECK(logit_confidence(p, 1) == doctest::Approx(std::log(9.0)));
  p = {0.0, 1.0};
  CHECK(logit_confidence(p, 1) == doctest::Approx(std::log((1.0 - 1e-6) / 1e-6)));
  CHECK(std::isfinite(logit_confidence(p, 0)));
}

TEST_CASE("gaussian fit uses unbiased variance with floor and fallback") {
  std::vector<double> two = {2.0, 4.0};
  GaussianFit g = fit_gaussian(two, 123.0);
  CHECK(g.mean == doctest::Approx(3.0));
  CHECK(g.var == doctest::Approx(2.0));  // unbiased: ((1)^2+(1)^2)/(2-1)
  std::vector<double> one = {5.0};
  GaussianFit f = fit_gaussian(one, 0.25);
  CHECK(f.mean == doctest::Approx(5.0));
  CHECK(f.var == doctest::Approx(0.25));
  std::vector<double> same = {1.0, 1.0, 1.0};
  CHECK(fit_gaussian(same, 0.0).var == doctest::Approx(1e-8));
}

TEST_CASE("lira scores against a closed-form gaussian oracle") {
  GaussianFit in{3.0, 2.0};
  GaussianFit out{0.0, 1e-8};
  auto pdf = [](double x, double mu, double var) {
    return std::exp(-(x - mu) * (x - mu) / (2 * var)) / std::sqrt(2 * M_PI * var);
  };
  const double phi = 3.0;
  CHECK(lira_online_score(phi, in, out) ==
        doctest::Approx(pdf(phi, 3, 2) / std::max(pdf(phi, 0, 1e-8), 1e-300)));
  GaussianFit o2{1.0, 4.0};
  CHECK(lira_offline_score(1.0, o2) == doctest::Approx(0.5));
  CHECK(lira_offline_score(100.0, o2) == doctest::Approx(1.0));
  // identical distributions give a constant ratio of 1
  GaussianFit same{0.7, 0.3};
  for (double x : {-2.0, 0.0, 5.0})
    CHECK(lira_online_score(x, same, same) == doctest::Approx(1.0));
}

TEST_CASE("rmia score matches hand enumeration and is monotone in gamma") {
  // target: p(x)=0.9, pool mean Pr(x)=0.3 -> ratio_x = 3
  // anchors: (p_t, Pr): (0.5, 0.5) -> lr 3; (0.9, 0.3) -> lr 1; (0.1, 0.4) -> lr 12
  std::vector<double> ptz = {0.5, 0.9, 0.1};
  std::vector<double> prz = {0.5, 0.3, 0.4};
  CHECK(rmia_score(0.9, 0.3, ptz, prz, 2.0) == doctest::Approx(2.0 / 3.0));
  CHECK(rmia_score(0.9, 0.3, ptz, prz, 4.0) == doctest::Approx(1.0 / 3.0));
  CHECK(rmia_score(0.9, 0.3, ptz, prz, 100.0) == doctest::Approx(0.0));
  // identical probabilities everywhere: every lr is 1
  std::vector<double> flat = {0.5, 0.5};
  CHECK(rmia_score(0.5, 0.5, flat, flat, 2.0) == 0.0);
  CHECK(rmia_score(0.5, 0.5, flat, flat, 1.0) == 1.0);  // ties count as >=
  CHECK(rmia_offline_interpolate(0.4, 0.3) == doctest::Approx(0.5 * (1.3 * 0.4 + 0.7)));
}

namespace {

double oracle_best_accuracy(const std::vector<double>& mem, const std::vector<double>& non,
                            bool leq) {
  std::vector<double> cand = mem;
  cand.insert(cand.end(), non.begin(), non.end());
  for (double shift : {-1.0, 1.0}) cand.push_back(cand.front() + shift * 1e9);
  for (std::size_t i = 0; i < mem.size(); ++i)
    for (std::size_t j = 0; j < non.size(); ++j) cand.push_back(0.5 * (mem[i] + non[j]));
  double best = 0.0;
  for (double b : cand) {
    double c = 0;
    for (double s : mem) c += (leq ? s <= b : s >= b) ? 1 : 0;
    for (double s : non) c += (leq ? s > b : s < b) ? 1 : 0;
    best = std::max(best, c / static_cast<double>(mem.size() + non.size()));
  }
  return best;
}

}  // namespace

TEST_CASE("threshold sweep maximizes accuracy against a quadratic oracle") {
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> mem, non;
    for (int i = 0; i < 6; ++i) {
      mem.push_back(std::round(rng.next_uniform(0, 10)));
      non.push_back(std::round(rng.next_uniform(0, 10)));
    }
    for (bool leq : {false, true}) {
      double acc = 0.0;
      const double beta = best_accuracy_threshold(mem, non, leq, &acc);
      CHECK(acc == doctest::Approx(oracle_best_accuracy(mem, non, leq)));
      // the returned threshold actually achieves the reported accuracy
      double c = 0;
      for (double s : mem) c += (leq ? s <= beta : s >= beta) ? 1 : 0;
      for (double s : non) c += (leq ? s > beta : s < beta) ? 1 : 0;
      CHECK(c / 12.0 == doctest::Approx(acc));
    }
  }
}

TEST_CASE("threshold sweep corner cases") {
  std::vector<double> mem = {1.0, 2.0, 3.0};
  std::vector<double> non = {4.0, 5.0, 6.0};
  double acc = 0.0;
  best_accuracy_threshold(mem, non, true, &acc);
  CHECK(acc == doctest::Approx(1.0));  // separable
  best_accuracy_threshold(mem, mem, true, &acc);
  CHECK(acc == doctest::Approx(0.5));  // identical distributions
}

TEST_CASE("percentile threshold takes the top-t percentile in the member direction") {
  std::vector<double> non(100);
  for (int i = 0; i < 100; ++i) non[static_cast<std::size_t>(i)] = i;  // 0..99
  ThresholdRule low = select_percentile_threshold(non, 10.0, AttackFamily::metric_loss);
  CHECK(low.member_if_leq);
  CHECK(low.global == doctest::Approx(9.0));
  ThresholdRule high =
      select_percentile_threshold(non, 10.0, AttackFamily::metric_confidence);
  CHECK(!high.member_if_leq);
  CHECK(high.global == doctest::Approx(89.0));
}

TEST_CASE("shadow attack rows are built from top-k probabilities or predicted labels") {
  QueryCache q;
  q.rows = {0, 1};
  q.labels = {1, 0};
  q.truth = {1, 0};
  q.proba = {{0.2, 0.8}, {0.7, 0.3}};
  Dataset probs = build_attack_query_dataset(q, ShadowMode::probabilities, 2, 2);
  CHECK(probs.n_columns() == 4);  // p1, p2, label, member
  CHECK(probs.column(0).num[0] == doctest::Approx(0.8));  // sorted descending
  CHECK(probs.column(1).num[0] == doctest::Approx(0.2));
  CHECK(probs.column(2).cat[0] == 1);
  CHECK(probs.label(0) == 1);
  CHECK(probs.label(1) == 0);
  Dataset preds = build_attack_query_dataset(q, ShadowMode::predictions, 2, 2);
  CHECK(preds.n_columns() == 3);  // predicted, label, member
  CHECK(preds.column(0).cat[0] == 1);
  CHECK(preds.column(0).cat[1] == 0);
  CHECK(preds.column(0).schema.kind == ColumnKind::categorical);
  // top_k above the class count clamps
  Dataset clamped = build_attack_query_dataset(q, ShadowMode::probabilities, 5, 2);
  CHECK(clamped.n_columns() == 4);
}

TEST_CASE("reference pool invariants hold across seeds") {
  Dataset d = make_overfit_dataset(200, 30);
  DataPartition p = make_partition(d, 31);
  std::set<std::size_t> inference(p.inference_members.begin(), p.inference_members.end());
  inference.insert(p.inference_nonmembers.begin(), p.inference_nonmembers.end());
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ReferencePool on =
        train_reference_pool(d, p, ModelKind::naive_bayes, 8, true, seed, 2);
    const std::size_t nq = on.query_rows.size();
    for (std::size_t q = 0; q < nq; ++q) {
      std::size_t ins = 0;
      for (std::size_t m = 0; m < on.n_models(); ++m) ins += on.in_mask[m][q];
      CHECK(ins >= 1);
      CHECK(ins < on.n_models());
    }
    ReferencePool off =
        train_reference_pool(d, p, ModelKind::naive_bayes, 8, false, seed, 2);
    for (const auto& rows : off.train_rows)
      for (std::size_t r : rows) CHECK(!inference.count(r));
  }
}

TEST_CASE("online pools include each query in about half the models") {
  Dataset d = make_overfit_dataset(200, 32);
  DataPartition p = make_partition(d, 33);
  ReferencePool pool = train_reference_pool(d, p, ModelKind::naive_bayes, 64, true, 9, 4);
  double total_in = 0.0;
  const std::size_t nq = pool.query_rows.size();
  for (std::size_t q = 0; q < nq; ++q)
    for (std::size_t m = 0; m < pool.n_models(); ++m) total_in += pool.in_mask[m][q];
  const double frac = total_in / static_cast<double>(nq * pool.n_models());
  CHECK(frac > 0.4);
  CHECK(frac < 0.6);
}

TEST_CASE("every family produces a complete, deterministic result") {
  Dataset d = make_overfit_dataset(240, 34);
  DataPartition p = make_partition(d, 35);
  ModelSpec tspec;
  tspec.kind = ModelKind::decision_tree;
  tspec.seed = 36;
  TrainedModel target = train_model(tspec, d, p.target_train);
  const std::size_t n_queries = p.inference_members.size() + p.inference_nonmembers.size();
  for (AttackFamily f : kAllFamilies) {
    CAPTURE(family_name(f));
    AttackSpec spec;
    spec.family = f;
    spec.surrogate_kind = ModelKind::naive_bayes;
    spec.n_reference_models = 8;
    spec.seed = 37;
    AttackResult a = run_attack(target, d, p, spec, 2);
    CHECK(a.size() == n_queries);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK((a.predicted[i] == 0 || a.predicted[i] == 1));
      CHECK((a.truth[i] == 0 || a.truth[i] == 1));
      CHECK(std::isfinite(a.score[i]));
    }
    AttackResult b = run_attack(target, d, p, spec, 1);  // jobs must not matter
    CHECK(a.score == b.score);
    CHECK(a.predicted == b.predicted);
    if (f == AttackFamily::rmia_online || f == AttackFamily::rmia_offline)
      for (double s : a.score) {
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
      }
  }
}

TEST_CASE("rmia score is monotone non-increasing in gamma end to end") {
  Dataset d = make_overfit_dataset(200, 38);
  DataPartition p = make_partition(d, 39);
  ModelSpec tspec;
  tspec.kind = ModelKind::decision_tree;
  TrainedModel target = train_model(tspec, d, p.target_train);
  AttackSpec spec;
  spec.family = AttackFamily::rmia_offline;
  spec.surrogate_kind = ModelKind::naive_bayes;
  spec.n_reference_models = 6;
  spec.seed = 40;
  spec.rmia_gamma = 1.0;
  AttackResult a = run_attack(target, d, p, spec);
  spec.rmia_gamma = 2.0;
  AttackResult b = run_attack(target, d, p, spec);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b.score[i] <= a.score[i] + 1e-12);
}

TEST_CASE("attack results round-trip through json and csv has one line per query") {
  Dataset d = make_overfit_dataset(160, 41);
  DataPartition p = make_partition(d, 42);
  ModelSpec tspec;
  tspec.kind = ModelKind::naive_bayes;
  TrainedModel target = train_model(tspec, d, p.target_train);
  AttackSpec spec;
  spec.family = AttackFamily::metric_loss;
  spec.surrogate_kind = ModelKind::naive_bayes;
  spec.seed = 43;
  AttackResult a = run_attack(target, d, p, spec);
  AttackResult b = AttackResult::from_json(a.to_json());
  CHECK(a.score == b.score);
  CHECK(a.record_index == b.record_index);
  const std::string csv = a.to_csv();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(a.size()) + 1);
}

TEST_CASE("transfer matrix covers the cross product with flagged baselines") {
  Dataset d = make_overfit_dataset(200, 44);
  DataPartition p = make_partition(d, 45);
  const AttackFamily fams[] = {AttackFamily::metric_loss};
  const ModelKind kinds[] = {ModelKind::naive_bayes, ModelKind::decision_tree};
  auto cells = run_transfer_matrix(d, p, fams, kinds, kinds, 46, 2);
  CHECK(cells.size() == 4);
  std::size_t baselines = 0;
  for (const auto& c : cells) {
    CHECK(c.ok);
    if (c.baseline) {
      ++baselines;
      CHECK(c.target_kind == c.surrogate_kind);
    }
  }
  CHECK(baselines == 2);
  auto again = run_transfer_matrix(d, p, fams, kinds, kinds, 46, 1);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CHECK(cells[i].result.score == again[i].result.score);
    CHECK(cells[i].result.predicted == again[i].result.predicted);
  }
}

TEST_CASE("scores keep the member orientation on shadow calibration data") {
  // overfit target: members should on average outscore non-members for the
  // loss and confidence statistics
  Dataset d = make_overfit_dataset(300, 47);
  DataPartition p = make_partition(d, 48);
  ModelSpec tspec;
  tspec.kind = ModelKind::decision_tree;
  TrainedModel target = train_model(tspec, d, p.target_train);
  for (AttackFamily f : {AttackFamily::metric_loss, AttackFamily::metric_confidence}) {
    AttackSpec spec;
    spec.family = f;
    spec.surrogate_kind = ModelKind::decision_tree;
    spec.seed = 49;
    AttackResult r = run_attack(target, d, p, spec);
    // confidence saturates at 1.0 on a fully overfit tree (all ties -> 0.5)
    CHECK(auc(r.score, r.truth) >= 0.5);
  }
  AttackSpec spec;
  spec.family = AttackFamily::metric_loss;
  spec.surrogate_kind = ModelKind::decision_tree;
  spec.seed = 49;
  AttackResult r = run_attack(target, d, p, spec);
  CHECK(auc(r.score, r.truth) > 0.55);
}
