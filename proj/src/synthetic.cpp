#include "mia/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mia/rng.hpp"

namespace mia {

namespace {

struct Blob {
  std::vector<std::vector<double>> num;  // n_features columns
  std::vector<int> labels;
};

Blob sample_base(std::size_t n_rows, std::size_t n_features, Rng& rng) {
  Blob b;
  b.num.assign(n_features, {});
  for (auto& col : b.num) col.reserve(n_rows);
  b.labels.reserve(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    std::vector<double> x(n_features);
    for (double& v : x) v = rng.next_normal();
    const double signal = 0.8 * x[0] + 0.6 * x[1] - 0.5 * x[2] + 0.4 * x[3] * x[4];
    const double p = 1.0 / (1.0 + std::exp(-1.1 * signal));
    const int label = rng.next_double() < p ? 1 : 0;
    for (std::size_t c = 0; c < n_features; ++c) b.num[c].push_back(x[c]);
    b.labels.push_back(label);
  }
  return b;
}

Column numeric_column(std::string name, std::vector<double> values) {
  Column c;
  c.schema.name = std::move(name);
  c.schema.kind = ColumnKind::numeric;
  c.num = std::move(values);
  return c;
}

Column categorical_column(std::string name, std::vector<std::string> categories,
                          std::vector<int> codes) {
  Column c;
  c.schema.name = std::move(name);
  c.schema.kind = ColumnKind::categorical;
  c.schema.categories = std::move(categories);
  c.cat = std::move(codes);
  return c;
}

}  // namespace

Dataset make_overfit_dataset(std::size_t n_rows, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n_features = 8;
  Blob b = sample_base(n_rows, n_features, rng);

  std::vector<Column> cols;
  for (std::size_t c = 0; c < n_features; ++c)
    cols.push_back(numeric_column("x" + std::to_string(c), std::move(b.num[c])));

  std::vector<int> ca(n_rows), cb(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    ca[r] = static_cast<int>(rng.next_index(4));
    cb[r] = static_cast<int>(rng.next_index(3));
  }
  cols.push_back(categorical_column("ca", {"a0", "a1", "a2", "a3"}, std::move(ca)));
  cols.push_back(categorical_column("cb", {"b0", "b1", "b2"}, std::move(cb)));

  cols.push_back(categorical_column("y", {"0", "1"}, std::move(b.labels)));
  const std::size_t label_col = cols.size() - 1;
  return Dataset("synthetic_overfit", std::move(cols), label_col);
}

Dataset make_singleout_dataset(std::size_t n_rows, std::size_t n_singles, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t n_features = 8;
  Blob b = sample_base(n_rows, n_features, rng);

  // Common QI pool (never unique at these sizes), plus unique codes for the
  // injected rows. Injected rows also get outlying numerics so any flexible
  // model memorizes them individually.
  std::vector<std::string> qa_cats = {"g0", "g1", "g2", "g3"};
  for (std::size_t s = 0; s < n_singles; ++s) qa_cats.push_back("u" + std::to_string(s));
  std::vector<int> qa(n_rows), qb(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    qa[r] = static_cast<int>(rng.next_index(4));
    qb[r] = static_cast<int>(rng.next_index(3));
  }
  // Spread injected rows evenly through the table.
  for (std::size_t s = 0; s < n_singles; ++s) {
    const std::size_t r = (s * n_rows) / n_singles;
    qa[r] = static_cast<int>(4 + s);
    b.num[0][r] = 6.0 + 0.5 * static_cast<double>(s);
    b.num[1][r] = -6.0 - 0.25 * static_cast<double>(s);
    b.labels[r] = static_cast<int>(s % 2);
  }

  std::vector<Column> cols;
  for (std::size_t c = 0; c < n_features; ++c)
    cols.push_back(numeric_column("x" + std::to_string(c), std::move(b.num[c])));
  // qa categories must be sorted for Dataset's categorical invariant; remap.
  {
    std::vector<std::string> sorted_cats = qa_cats;
    std::sort(sorted_cats.begin(), sorted_cats.end());
    std::vector<int> remap(qa_cats.size());
    for (std::size_t i = 0; i < qa_cats.size(); ++i) {
      auto it = std::lower_bound(sorted_cats.begin(), sorted_cats.end(), qa_cats[i]);
      remap[i] = static_cast<int>(it - sorted_cats.begin());
    }
    for (int& code : qa) code = remap[code];
    cols.push_back(categorical_column("qa", std::move(sorted_cats), std::move(qa)));
  }
  cols.push_back(categorical_column("qb", {"h0", "h1", "h2"}, std::move(qb)));
  cols.push_back(categorical_column("y", {"0", "1"}, std::move(b.labels)));
  const std::size_t label_col = cols.size() - 1;
  return Dataset("synthetic_singleout", std::move(cols), label_col);
}

}  // namespace mia
