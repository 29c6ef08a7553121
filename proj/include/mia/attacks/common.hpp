#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mia/model.hpp"
#include "mia/partition.hpp"

namespace mia {

enum class AttackFamily {
  shadow_predictions,
  shadow_probabilities,
  lira_online,
  lira_offline,
  rmia_online,
  rmia_offline,
  metric_correctness,
  metric_loss,
  metric_confidence,
  metric_modified_entropy,
};

inline constexpr AttackFamily kAllFamilies[] = {
    AttackFamily::shadow_predictions,  AttackFamily::shadow_probabilities,
    AttackFamily::lira_online,         AttackFamily::lira_offline,
    AttackFamily::rmia_online,         AttackFamily::rmia_offline,
    AttackFamily::metric_correctness,  AttackFamily::metric_loss,
    AttackFamily::metric_confidence,   AttackFamily::metric_modified_entropy,
};

std::string family_name(AttackFamily f);
AttackFamily family_from_name(const std::string& name);

bool family_uses_reference_pool(AttackFamily f);
bool family_uses_online_pool(AttackFamily f);
bool family_uses_shadow_model(AttackFamily f);

struct AttackSpec {
  AttackFamily family = AttackFamily::metric_loss;
  // 0 means the family default: 256 online / 128 offline, 64/32 on large data.
  std::size_t n_reference_models = 0;
  ModelKind surrogate_kind = ModelKind::random_forest;
  // Shadow-attack classifier kind; defaults to surrogate_kind.
  std::optional<ModelKind> attack_model_kind;
  int top_k = 0;  // 0 means auto: 2 for binary tasks, 3 otherwise
  double rmia_gamma = 2.0;
  double rmia_offline_a = 0.3;
  std::size_t rmia_z_max = 2500;
  bool percentile_threshold = false;  // metric families: top-t percentile rule
  double percentile_t = 10.0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static AttackSpec from_json(const nlohmann::json& j);
};

std::size_t default_reference_models(AttackFamily f, std::size_t dataset_rows);
int default_top_k(int n_classes);

// Resolved knobs for one run (defaults filled in from the data at hand).
std::size_t resolve_reference_models(const AttackSpec& spec, std::size_t dataset_rows);
int resolve_top_k(const AttackSpec& spec, int n_classes);

struct AttackResult {
  AttackFamily family = AttackFamily::metric_loss;
  std::string target_id;
  std::string attack_id;
  std::uint64_t seed = 0;
  std::vector<std::size_t> record_index;  // dataset row of each query
  std::vector<double> score;              // higher = more member
  std::vector<int> predicted;             // decision bit b-hat
  std::vector<int> truth;                 // ground-truth membership bit

  std::size_t size() const { return record_index.size(); }
  nlohmann::json to_json() const;
  static AttackResult from_json(const nlohmann::json& j);
  std::string to_csv() const;  // record id, score, predicted, truth
};

// The inference queries with the target's probability vectors, scored exactly
// once; members first, then non-members.
struct QueryCache {
  std::vector<std::size_t> rows;
  std::vector<int> labels;
  std::vector<int> truth;
  std::vector<std::vector<double>> proba;  // target output per query

  std::size_t size() const { return rows.size(); }
};

QueryCache make_query_cache(const TrainedModel& target, const Dataset& d,
                            const DataPartition& p);

}  // namespace mia
