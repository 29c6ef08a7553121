#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "mia/dataset.hpp"
#include "mia/encode.hpp"
#include "mia/partition.hpp"
#include "mia/rng.hpp"
#include "mia/singleout.hpp"
#include "mia/synthetic.hpp"

using namespace mia;

TEST_CASE("rng streams are deterministic and independent") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c = Rng(42).derive(1);
  Rng d = Rng(42).derive(2);
  CHECK(c.seed() != d.seed());
  CHECK(derive_seed(42, 1) == Rng(42).derive(1).seed());
}

TEST_CASE("rng uniform index stays in range and covers values") {
  Rng r(7);
  std::set<std::size_t> seen;
  for (int i = 0; i < 1000; ++i) {
    std::size_t v = r.next_index(10);
    CHECK(v < 10);
    seen.insert(v);
  }
  CHECK(seen.size() == 10);
}

TEST_CASE("csv parsing infers kinds, drops incomplete rows, flags ragged rows") {
  const std::string text =
      "age,job,y\n"
      "30,a,0\n"
      "41,b,1\n"
      ",b,1\n"
      "22,a,0\n";
  LoadOptions opts;
  opts.label = "y";
  Dataset d = load_csv_text(text, opts, "t");
  CHECK(d.n_rows() == 3);
  CHECK(d.dropped_rows() == 1);
  CHECK(d.column(0).schema.kind == ColumnKind::numeric);
  CHECK(d.column(1).schema.kind == ColumnKind::categorical);
  CHECK(d.n_classes() == 2);

  const std::string ragged = "a,b,y\n1,2,0\n1,0\n";
  CHECK_THROWS_WITH_AS(load_csv_text(ragged, opts, "r"),
                       doctest::Contains("row 3"), std::runtime_error);
}

TEST_CASE("label column is categorical even when numeric-looking") {
  const std::string text = "x,y\n1.5,0\n2.5,1\n3.5,2\n";
  LoadOptions opts;
  opts.label = "y";
  Dataset d = load_csv_text(text, opts, "t");
  CHECK(d.n_classes() == 3);
  CHECK(d.label(0) == 0);
  CHECK(d.label(2) == 2);
}

TEST_CASE("encoder standardizes from fit rows only and one-hots categoricals") {
  const std::string text =
      "x,c,y\n"
      "0,a,0\n"
      "2,b,1\n"
      "4,a,0\n"
      "100,b,1\n";
  LoadOptions opts;
  opts.label = "y";
  Dataset d = load_csv_text(text, opts, "t");
  std::vector<std::size_t> fit_rows = {0, 1, 2};
  Encoder e = Encoder::fit(d, fit_rows);
  CHECK(e.n_out_cols() == 3);  // 1 numeric + 2 one-hot
  EncodedMatrix m = e.apply(d, fit_rows);
  // mean 2, population std sqrt(8/3) over rows {0,2,4}
  const double std0 = std::sqrt(8.0 / 3.0);
  CHECK(m.row(0)[0] == doctest::Approx(-2.0 / std0));
  CHECK(m.row(1)[0] == doctest::Approx(0.0));
  CHECK(m.row(2)[0] == doctest::Approx(2.0 / std0));
  CHECK(m.row(0)[1] == 1.0);  // category a
  CHECK(m.row(1)[2] == 1.0);  // category b
  std::vector<std::size_t> other = {3};
  EncodedMatrix t = e.apply(d, other);
  CHECK(t.row(0)[0] == doctest::Approx(98.0 / std0));  // fit stats reused
}

TEST_CASE("encoder zero-variance column encodes to zero with a warning") {
  const std::string text = "x,z,y\n1,5,0\n2,5,1\n3,5,0\n";
  LoadOptions opts;
  opts.label = "y";
  Dataset d = load_csv_text(text, opts, "t");
  std::vector<std::size_t> rows = {0, 1, 2};
  Encoder e = Encoder::fit(d, rows);
  EncodedMatrix m = e.apply(d, rows);
  for (std::size_t i = 0; i < 3; ++i) CHECK(m.row(i)[1] == 0.0);
  CHECK(!e.warnings().empty());
}

TEST_CASE("partition sizes follow the split protocol") {
  Dataset d = make_overfit_dataset(600, 3);
  DataPartition p = make_partition(d, 11);
  CHECK(p.population.size() == 300);
  const std::size_t rest = 300;
  CHECK(p.target_test.size() == rest / 4);
  CHECK(p.target_train.size() == rest - rest / 4);
  const std::size_t m = std::min((p.target_train.size() + 3) / 4, p.target_test.size());
  CHECK(p.inference_members.size() == m);
  CHECK(p.inference_nonmembers.size() == m);

  // disjointness and provenance
  std::set<std::size_t> pop(p.population.begin(), p.population.end());
  std::set<std::size_t> train(p.target_train.begin(), p.target_train.end());
  std::set<std::size_t> test(p.target_test.begin(), p.target_test.end());
  for (std::size_t r : train) CHECK(!pop.count(r));
  for (std::size_t r : test) {
    CHECK(!pop.count(r));
    CHECK(!train.count(r));
  }
  for (std::size_t r : p.inference_members) CHECK(train.count(r));
  for (std::size_t r : p.inference_nonmembers) CHECK(test.count(r));
}

TEST_CASE("partition is seed-deterministic and round-trips through json") {
  Dataset d = make_overfit_dataset(200, 5);
  DataPartition a = make_partition(d, 9);
  DataPartition b = make_partition(d, 9);
  CHECK(a.population == b.population);
  CHECK(a.inference_members == b.inference_members);
  DataPartition c = partition_from_json(partition_to_json(a));
  CHECK(c.target_train == a.target_train);
  CHECK(c.inference_nonmembers == a.inference_nonmembers);
  DataPartition other = make_partition(d, 10);
  CHECK(other.population != a.population);
}

TEST_CASE("federated shards are disjoint and balanced") {
  Dataset d = make_overfit_dataset(400, 1);
  DataPartition p = make_partition(d, 2);
  auto shards = make_federated_shards(p, 3, 4);
  CHECK(shards.size() == 3);
  std::set<std::size_t> seen;
  std::size_t total = 0;
  for (const auto& s : shards) {
    total += s.train.size();
    for (std::size_t r : s.train) CHECK(seen.insert(r).second);
  }
  CHECK(total == p.target_train.size());
  for (const auto& s : shards)
    CHECK(s.train.size() >= p.target_train.size() / 3);
}

namespace {

// O(N^2) oracle: compare every pair of rows on the QI columns.
std::vector<std::size_t> brute_single_outs(const Dataset& d, const QuasiIdentifierSet& q) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < d.n_rows(); ++i) {
    bool unique = true;
    for (std::size_t j = 0; j < d.n_rows() && unique; ++j) {
      if (i == j) continue;
      bool same = true;
      for (std::size_t c : q.qi_columns)
        if (d.cell_text(i, c) != d.cell_text(j, c)) { same = false; break; }
      if (same) unique = false;
    }
    if (unique) out.push_back(i);
  }
  return out;
}

}  // namespace

TEST_CASE("single-out detection matches the quadratic oracle on random data") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Dataset d = make_singleout_dataset(150, 1 + seed % 6, seed);
    QuasiIdentifierSet q = qi_from_names(d, {"qa", "qb"});
    SingleOutReport r = detect_single_outs(d, q);
    CHECK(r.single_out_indices == brute_single_outs(d, q));
    std::size_t total = 0;
    for (const auto& [key, f] : r.equivalence_class_sizes) total += f;
    CHECK(total == d.n_rows());
  }
}

TEST_CASE("injected unique rows are detected as single-outs") {
  Dataset d = make_singleout_dataset(300, 5, 8);
  QuasiIdentifierSet q = qi_from_names(d, {"qa", "qb"});
  SingleOutReport r = detect_single_outs(d, q);
  CHECK(r.single_out_indices.size() >= 5);
}

TEST_CASE("label column rejected as a quasi-identifier") {
  Dataset d = make_singleout_dataset(100, 2, 3);
  CHECK_THROWS_AS(qi_from_names(d, {"y"}), std::runtime_error);
  CHECK_THROWS_AS(detect_single_outs(d, QuasiIdentifierSet{}), std::runtime_error);
}

TEST_CASE("synthetic datasets are deterministic in the seed") {
  Dataset a = make_overfit_dataset(100, 5);
  Dataset b = make_overfit_dataset(100, 5);
  for (std::size_t c = 0; c < a.n_columns(); ++c)
    for (std::size_t r = 0; r < a.n_rows(); ++r)
      CHECK(a.cell_text(r, c) == b.cell_text(r, c));
}
