#include "mia/attacks/refpool.hpp"

#include <stdexcept>
#include <unordered_set>

#include "mia/parallel.hpp"
#include "mia/rng.hpp"

namespace mia {

namespace {

std::vector<std::size_t> half_sample(const std::vector<std::size_t>& universe, Rng& rng) {
  std::vector<std::size_t> pool = universe;
  rng.shuffle(pool);
  pool.resize(std::max<std::size_t>(1, pool.size() / 2));
  return pool;
}

}  // namespace

ReferencePool train_reference_pool(const Dataset& d, const DataPartition& p,
                                   ModelKind kind, std::size_t n_models, bool online,
                                   std::uint64_t seed, std::size_t jobs) {
  if (n_models < 2) throw std::runtime_error("reference pool needs at least 2 models");

  ReferencePool pool;
  pool.online = online;
  for (std::size_t r : p.inference_members) pool.query_rows.push_back(r);
  for (std::size_t r : p.inference_nonmembers) pool.query_rows.push_back(r);
  const std::size_t n_queries = pool.query_rows.size();

  std::vector<std::size_t> universe = p.population;
  if (online) universe.insert(universe.end(), pool.query_rows.begin(), pool.query_rows.end());

  // Draw all training sets; online pools redraw the whole assignment until
  // every query has at least one IN and one OUT model (budget 10).
  const int budget = online ? 10 : 1;
  for (int attempt = 0; attempt < budget; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    pool.train_rows.clear();
    pool.in_mask.clear();
    pool.train_rows.reserve(n_models);
    for (std::size_t m = 0; m < n_models; ++m) {
      Rng mr = rng.derive(m);
      pool.train_rows.push_back(half_sample(universe, mr));
    }
    if (!online) break;
    pool.in_mask.assign(n_models, std::vector<char>(n_queries, 0));
    for (std::size_t m = 0; m < n_models; ++m) {
      std::unordered_set<std::size_t> rows(pool.train_rows[m].begin(),
                                           pool.train_rows[m].end());
      for (std::size_t q = 0; q < n_queries; ++q)
        pool.in_mask[m][q] = rows.count(pool.query_rows[q]) ? 1 : 0;
    }
    bool covered = true;
    for (std::size_t q = 0; q < n_queries && covered; ++q) {
      std::size_t ins = 0;
      for (std::size_t m = 0; m < n_models; ++m) ins += pool.in_mask[m][q];
      covered = ins >= 1 && ins < n_models;
    }
    if (covered) break;
    if (attempt + 1 == budget)
      throw std::runtime_error("online pool could not cover every query with IN and OUT models");
  }

  pool.models.resize(n_models);
  parallel_for(n_models, jobs, [&](std::size_t m) {
    ModelSpec spec;
    spec.kind = kind;
    spec.seed = derive_seed(seed, 1000 + m);
    pool.models[m] = train_model(spec, d, pool.train_rows[m]);
  });
  return pool;
}

std::vector<double> pool_true_class_probs(const ReferencePool& pool, const Dataset& d,
                                          std::size_t row, std::size_t jobs) {
  const int y = d.label(row);
  std::vector<double> out(pool.n_models());
  parallel_for(pool.n_models(), jobs, [&](std::size_t m) {
    const std::vector<double> p = pool.models[m].predict_row(d, row);
    out[m] = p[static_cast<std::size_t>(y)];
  });
  return out;
}

}  // namespace mia
