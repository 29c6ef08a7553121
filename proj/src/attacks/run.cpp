#include "mia/attacks/run.hpp"

#include <map>
#include <stdexcept>

#include "mia/attacks/lira.hpp"
#include "mia/attacks/metric.hpp"
#include "mia/attacks/rmia.hpp"
#include "mia/attacks/shadow.hpp"
#include "mia/rng.hpp"

namespace mia {

AttackResult run_attack(const TrainedModel& target, const Dataset& d, const DataPartition& p,
                        const AttackSpec& spec, std::size_t jobs,
                        const ReferencePool* pool) {
  AttackResult r;
  switch (spec.family) {
    case AttackFamily::shadow_predictions:
    case AttackFamily::shadow_probabilities:
      r = run_shadow_attack(target, d, p, spec);
      break;
    case AttackFamily::metric_correctness:
    case AttackFamily::metric_loss:
    case AttackFamily::metric_confidence:
    case AttackFamily::metric_modified_entropy:
      r = run_metric_attack(target, d, p, spec);
      break;
    case AttackFamily::lira_online:
    case AttackFamily::lira_offline:
    case AttackFamily::rmia_online:
    case AttackFamily::rmia_offline: {
      ReferencePool local;
      if (!pool) {
        local = train_reference_pool(d, p, spec.surrogate_kind,
                                     resolve_reference_models(spec, d.n_rows()),
                                     family_uses_online_pool(spec.family),
                                     derive_seed(spec.seed, 0xB001), jobs);
        pool = &local;
      }
      if (spec.family == AttackFamily::lira_online ||
          spec.family == AttackFamily::lira_offline)
        r = run_lira(target, d, p, *pool, spec, jobs);
      else
        r = run_rmia(target, d, p, *pool, spec, jobs);
      break;
    }
  }
  r.target_id = kind_name(target.spec().kind);
  r.attack_id = family_name(spec.family) + ":" + kind_name(spec.surrogate_kind);
  return r;
}

std::vector<TransferCell> run_transfer_matrix(const Dataset& d, const DataPartition& p,
                                              std::span<const AttackFamily> families,
                                              std::span<const ModelKind> target_kinds,
                                              std::span<const ModelKind> surrogate_kinds,
                                              std::uint64_t seed, std::size_t jobs) {
  // One target per kind, shared across all cells.
  std::map<ModelKind, TrainedModel> targets;
  std::map<ModelKind, std::string> target_errors;
  for (ModelKind tk : target_kinds) {
    if (targets.count(tk) || target_errors.count(tk)) continue;
    try {
      ModelSpec spec;
      spec.kind = tk;
      spec.seed = derive_seed(seed, 0x7000 + static_cast<std::uint64_t>(tk));
      targets.emplace(tk, train_model(spec, d, p.target_train));
    } catch (const std::exception& e) {
      target_errors.emplace(tk, e.what());
    }
  }

  // Reference pools depend only on (surrogate kind, mode); built lazily and
  // shared across cells with order-independent seeds.
  std::map<std::pair<ModelKind, bool>, ReferencePool> pools;
  auto get_pool = [&](ModelKind sk, bool online, std::size_t n_models) -> const ReferencePool& {
    const auto key = std::make_pair(sk, online);
    auto it = pools.find(key);
    if (it == pools.end()) {
      const std::uint64_t pseed =
          derive_seed(seed, 0x9000 + 2 * static_cast<std::uint64_t>(sk) + (online ? 1 : 0));
      it = pools
               .emplace(key, train_reference_pool(d, p, sk, n_models, online, pseed, jobs))
               .first;
    }
    return it->second;
  };

  std::vector<TransferCell> cells;
  std::size_t index = 0;
  for (AttackFamily f : families) {
    for (ModelKind tk : target_kinds) {
      for (ModelKind sk : surrogate_kinds) {
        TransferCell cell;
        cell.family = f;
        cell.target_kind = tk;
        cell.surrogate_kind = sk;
        cell.baseline = tk == sk;
        const std::uint64_t cell_seed = derive_seed(seed, index++);
        try {
          auto terr = target_errors.find(tk);
          if (terr != target_errors.end()) throw std::runtime_error(terr->second);
          AttackSpec spec;
          spec.family = f;
          spec.surrogate_kind = sk;
          spec.seed = cell_seed;
          const ReferencePool* pool = nullptr;
          if (family_uses_reference_pool(f))
            pool = &get_pool(sk, family_uses_online_pool(f),
                             resolve_reference_models(spec, d.n_rows()));
          cell.result = run_attack(targets.at(tk), d, p, spec, jobs, pool);
          cell.ok = true;
        } catch (const std::exception& e) {
          cell.error = e.what();
        }
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

}  // namespace mia
