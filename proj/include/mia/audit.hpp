#pragma once

#include <map>
#include <string>
#include <vector>

#include "mia/attacks/run.hpp"
#include "mia/eval.hpp"
#include "mia/fed.hpp"
#include "mia/grid.hpp"

namespace mia {

inline constexpr const char* kToolkitVersion = "0.1.0";

// Training regimes an audit can exercise for each model kind.
enum class Regime { central_weak, central_defended, federated };

std::string regime_name(Regime r);
Regime regime_from_name(const std::string& name);

struct AuditConfig {
  // [dataset]
  std::string dataset_path;
  std::string label;
  std::string dataset_name;
  std::map<std::string, ColumnKind> kind_overrides;
  std::vector<std::string> qi_columns;

  // [audit]
  std::vector<Regime> regimes = {Regime::central_weak};
  std::vector<ModelKind> kinds = {ModelKind::naive_bayes};
  std::string out_dir = "out";
  std::size_t jobs = 0;  // 0 = all processors

  // [attacks]
  std::vector<AttackFamily> families = {AttackFamily::metric_loss};
  std::size_t reference_models_online = 0;   // 0 = family defaults
  std::size_t reference_models_offline = 0;
  double rmia_gamma = 2.0;
  double rmia_offline_a = 0.3;
  int top_k = 0;
  bool percentile_threshold = false;
  double percentile_t = 10.0;
  std::vector<ModelKind> surrogate_kinds;  // transfer only; empty = kinds

  // [seeds]
  std::uint64_t seed = 1;
  std::size_t sweep = 1;

  // [federated]
  std::size_t participants = 3;
  std::size_t rounds = 20;
  std::size_t local_epochs = 10;
  std::size_t trees_per_round = 5;

  nlohmann::json to_json() const;
};

// Plain-text section/key grammar; a leading '{' switches to the JSON
// encoding of the same schema.
AuditConfig parse_config_text(const std::string& text);
AuditConfig parse_config_file(const std::string& path);
AuditConfig config_from_json(const nlohmann::json& j);

Dataset load_audit_dataset(const AuditConfig& cfg);

struct AuditCell {
  Regime regime = Regime::central_weak;
  ModelKind kind = ModelKind::naive_bayes;
  AttackFamily family = AttackFamily::metric_loss;
  std::size_t seed_index = 0;
  bool ok = false;
  std::string error;
  AttackResult result;
  MetricsReport metrics;
  bool binary_scores = false;  // correctness-style: no ROC file emitted
};

struct TargetCell {
  Regime regime = Regime::central_weak;
  ModelKind kind = ModelKind::naive_bayes;
  std::size_t seed_index = 0;
  bool ok = false;
  std::string error;
  GeneralizationReport generalization;
  nlohmann::json best_hyper;
};

struct AuditOutcome {
  nlohmann::json report;  // byte-deterministic given the config
  std::vector<AuditCell> cells;
  std::vector<TargetCell> targets;
  bool partial_failures = false;
  std::string metrics_csv;
  std::map<std::string, std::string> roc_csvs;     // file stem -> contents
  std::map<std::string, std::string> attack_csvs;  // file stem -> contents
  std::map<std::string, nlohmann::json> partitions;
};

AuditOutcome run_audit(const AuditConfig& cfg, const Dataset& d);

struct TransferOutcome {
  nlohmann::json report;
  std::map<std::string, std::string> family_csvs;  // transfer_<family>.csv
  bool partial_failures = false;
};

TransferOutcome run_transfer(const AuditConfig& cfg, const Dataset& d);

nlohmann::json run_singleouts(const AuditConfig& cfg, const Dataset& d);

// Writes report.json plus every declared CSV/manifest under cfg.out_dir.
void write_audit_outputs(const AuditConfig& cfg, const AuditOutcome& outcome);

}  // namespace mia
