#include "mia/attacks/common.hpp"

#include <sstream>
#include <stdexcept>

namespace mia {

std::string family_name(AttackFamily f) {
  switch (f) {
    case AttackFamily::shadow_predictions: return "shadow_predictions";
    case AttackFamily::shadow_probabilities: return "shadow_probabilities";
    case AttackFamily::lira_online: return "lira_online";
    case AttackFamily::lira_offline: return "lira_offline";
    case AttackFamily::rmia_online: return "rmia_online";
    case AttackFamily::rmia_offline: return "rmia_offline";
    case AttackFamily::metric_correctness: return "metric_correctness";
    case AttackFamily::metric_loss: return "metric_loss";
    case AttackFamily::metric_confidence: return "metric_confidence";
    case AttackFamily::metric_modified_entropy: return "metric_modified_entropy";
  }
  throw std::runtime_error("unknown attack family");
}

AttackFamily family_from_name(const std::string& name) {
  for (AttackFamily f : kAllFamilies)
    if (family_name(f) == name) return f;
  throw std::runtime_error("unknown attack family: " + name);
}

bool family_uses_reference_pool(AttackFamily f) {
  return f == AttackFamily::lira_online || f == AttackFamily::lira_offline ||
         f == AttackFamily::rmia_online || f == AttackFamily::rmia_offline;
}

bool family_uses_online_pool(AttackFamily f) {
  return f == AttackFamily::lira_online || f == AttackFamily::rmia_online;
}

bool family_uses_shadow_model(AttackFamily f) {
  return f == AttackFamily::shadow_predictions || f == AttackFamily::shadow_probabilities ||
         f == AttackFamily::metric_correctness || f == AttackFamily::metric_loss ||
         f == AttackFamily::metric_confidence || f == AttackFamily::metric_modified_entropy;
}

std::size_t default_reference_models(AttackFamily f, std::size_t dataset_rows) {
  const bool online = family_uses_online_pool(f);
  const bool large = dataset_rows > 20000;
  if (online) return large ? 64 : 256;
  return large ? 32 : 128;
}

int default_top_k(int n_classes) { return n_classes <= 2 ? 2 : 3; }

std::size_t resolve_reference_models(const AttackSpec& spec, std::size_t dataset_rows) {
  if (spec.n_reference_models > 0) return spec.n_reference_models;
  return default_reference_models(spec.family, dataset_rows);
}

int resolve_top_k(const AttackSpec& spec, int n_classes) {
  int k = spec.top_k > 0 ? spec.top_k : default_top_k(n_classes);
  if (k > n_classes) k = n_classes;  // clamp, never error
  return k;
}

nlohmann::json AttackSpec::to_json() const {
  nlohmann::json j;
  j["family"] = family_name(family);
  j["n_reference_models"] = n_reference_models;
  j["surrogate_kind"] = kind_name(surrogate_kind);
  if (attack_model_kind) j["attack_model_kind"] = kind_name(*attack_model_kind);
  j["top_k"] = top_k;
  j["rmia_gamma"] = rmia_gamma;
  j["rmia_offline_a"] = rmia_offline_a;
  j["rmia_z_max"] = rmia_z_max;
  j["percentile_threshold"] = percentile_threshold;
  j["percentile_t"] = percentile_t;
  j["seed"] = seed;
  return j;
}

AttackSpec AttackSpec::from_json(const nlohmann::json& j) {
  AttackSpec s;
  s.family = family_from_name(j.at("family").get<std::string>());
  s.n_reference_models = j.value("n_reference_models", std::size_t{0});
  if (j.contains("surrogate_kind"))
    s.surrogate_kind = kind_from_name(j["surrogate_kind"].get<std::string>());
  if (j.contains("attack_model_kind"))
    s.attack_model_kind = kind_from_name(j["attack_model_kind"].get<std::string>());
  s.top_k = j.value("top_k", 0);
  s.rmia_gamma = j.value("rmia_gamma", 2.0);
  s.rmia_offline_a = j.value("rmia_offline_a", 0.3);
  s.rmia_z_max = j.value("rmia_z_max", std::size_t{2500});
  s.percentile_threshold = j.value("percentile_threshold", false);
  s.percentile_t = j.value("percentile_t", 10.0);
  s.seed = j.value("seed", std::uint64_t{0});
  return s;
}

nlohmann::json AttackResult::to_json() const {
  nlohmann::json j;
  j["family"] = family_name(family);
  j["target_id"] = target_id;
  j["attack_id"] = attack_id;
  j["seed"] = seed;
  j["record_index"] = record_index;
  j["score"] = score;
  j["predicted"] = predicted;
  j["truth"] = truth;
  return j;
}

AttackResult AttackResult::from_json(const nlohmann::json& j) {
  AttackResult r;
  r.family = family_from_name(j.at("family").get<std::string>());
  r.target_id = j.value("target_id", "");
  r.attack_id = j.value("attack_id", "");
  r.seed = j.value("seed", std::uint64_t{0});
  r.record_index = j.at("record_index").get<std::vector<std::size_t>>();
  r.score = j.at("score").get<std::vector<double>>();
  r.predicted = j.at("predicted").get<std::vector<int>>();
  r.truth = j.at("truth").get<std::vector<int>>();
  return r;
}

std::string AttackResult::to_csv() const {
  std::ostringstream out;
  out << "record,score,predicted,truth\n";
  for (std::size_t i = 0; i < size(); ++i) {
    out << record_index[i] << ',' << nlohmann::json(score[i]).dump() << ',' << predicted[i] << ','
        << truth[i] << '\n';
  }
  return out.str();
}

QueryCache make_query_cache(const TrainedModel& target, const Dataset& d,
                            const DataPartition& p) {
  QueryCache q;
  const std::size_t n = p.inference_members.size() + p.inference_nonmembers.size();
  q.rows.reserve(n);
  for (std::size_t r : p.inference_members) q.rows.push_back(r);
  for (std::size_t r : p.inference_nonmembers) q.rows.push_back(r);
  q.labels.reserve(n);
  q.truth.reserve(n);
  q.proba.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    q.labels.push_back(d.label(q.rows[i]));
    q.truth.push_back(i < p.inference_members.size() ? 1 : 0);
    q.proba.push_back(target.predict_row(d, q.rows[i]));
  }
  return q;
}

}  // namespace mia
