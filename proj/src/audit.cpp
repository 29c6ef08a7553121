#include "mia/audit.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mia/rng.hpp"
#include "mia/singleout.hpp"

namespace mia {

std::string regime_name(Regime r) {
  switch (r) {
    case Regime::central_weak: return "central_weak";
    case Regime::central_defended: return "central_defended";
    case Regime::federated: return "federated";
  }
  throw std::runtime_error("unknown regime");
}

Regime regime_from_name(const std::string& name) {
  for (Regime r : {Regime::central_weak, Regime::central_defended, Regime::federated})
    if (regime_name(r) == name) return r;
  throw std::runtime_error("unknown regime: " + name);
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    return std::stoull(v);
  } catch (...) {
    throw std::runtime_error("config key '" + key + "' expects an integer, got '" + v + "'");
  }
}

double parse_num(const std::string& key, const std::string& v) {
  try {
    return std::stod(v);
  } catch (...) {
    throw std::runtime_error("config key '" + key + "' expects a number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error("config key '" + key + "' expects a boolean, got '" + v + "'");
}

void apply_key(AuditConfig& cfg, const std::string& section, const std::string& key,
               const std::string& value) {
  auto unknown = [&]() -> std::runtime_error {
    return std::runtime_error("unknown config key '" + key + "' in section [" + section + "]");
  };
  if (section == "dataset") {
    if (key == "path") cfg.dataset_path = value;
    else if (key == "label") cfg.label = value;
    else if (key == "name") cfg.dataset_name = value;
    else if (key == "categorical")
      for (const auto& c : split_list(value)) cfg.kind_overrides[c] = ColumnKind::categorical;
    else if (key == "numeric")
      for (const auto& c : split_list(value)) cfg.kind_overrides[c] = ColumnKind::numeric;
    else if (key == "qi") cfg.qi_columns = split_list(value);
    else throw unknown();
  } else if (section == "audit") {
    if (key == "regimes") {
      cfg.regimes.clear();
      for (const auto& r : split_list(value)) cfg.regimes.push_back(regime_from_name(r));
    } else if (key == "kinds") {
      cfg.kinds.clear();
      for (const auto& k : split_list(value)) cfg.kinds.push_back(kind_from_name(k));
    } else if (key == "out") cfg.out_dir = value;
    else if (key == "jobs") cfg.jobs = parse_u64(key, value);
    else throw unknown();
  } else if (section == "attacks") {
    if (key == "families") {
      cfg.families.clear();
      for (const auto& f : split_list(value)) cfg.families.push_back(family_from_name(f));
    } else if (key == "reference_models_online")
      cfg.reference_models_online = parse_u64(key, value);
    else if (key == "reference_models_offline")
      cfg.reference_models_offline = parse_u64(key, value);
    else if (key == "rmia_gamma") cfg.rmia_gamma = parse_num(key, value);
    else if (key == "rmia_offline_a") cfg.rmia_offline_a = parse_num(key, value);
    else if (key == "top_k") cfg.top_k = static_cast<int>(parse_u64(key, value));
    else if (key == "percentile_threshold") cfg.percentile_threshold = parse_bool(key, value);
    else if (key == "percentile_t") cfg.percentile_t = parse_num(key, value);
    else if (key == "surrogates") {
      cfg.surrogate_kinds.clear();
      for (const auto& k : split_list(value)) cfg.surrogate_kinds.push_back(kind_from_name(k));
    } else throw unknown();
  } else if (section == "seeds") {
    if (key == "master") cfg.seed = parse_u64(key, value);
    else if (key == "sweep") cfg.sweep = parse_u64(key, value);
    else throw unknown();
  } else if (section == "federated") {
    if (key == "participants") cfg.participants = parse_u64(key, value);
    else if (key == "rounds") cfg.rounds = parse_u64(key, value);
    else if (key == "local_epochs") cfg.local_epochs = parse_u64(key, value);
    else if (key == "trees_per_round") cfg.trees_per_round = parse_u64(key, value);
    else throw unknown();
  } else {
    throw std::runtime_error("unknown config section [" + section + "]");
  }
}

void validate_config(const AuditConfig& cfg) {
  if (cfg.dataset_path.empty()) throw std::runtime_error("config: dataset path is required");
  if (cfg.label.empty()) throw std::runtime_error("config: dataset label is required");
  if (cfg.regimes.empty()) throw std::runtime_error("config: at least one regime");
  if (cfg.kinds.empty()) throw std::runtime_error("config: at least one model kind");
  if (cfg.families.empty()) throw std::runtime_error("config: at least one attack family");
  if (cfg.sweep == 0) throw std::runtime_error("config: seed sweep must be >= 1");
}

}  // namespace

AuditConfig parse_config_text(const std::string& text) {
  const std::string trimmed = trim(text);
  if (!trimmed.empty() && trimmed.front() == '{')
    return config_from_json(nlohmann::json::parse(trimmed));
  AuditConfig cfg;
  std::string section;
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config line " + std::to_string(line_no) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
    if (section.empty())
      throw std::runtime_error("config line " + std::to_string(line_no) + ": key outside a section");
    apply_key(cfg, section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  validate_config(cfg);
  return cfg;
}

AuditConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

AuditConfig config_from_json(const nlohmann::json& j) {
  AuditConfig cfg;
  for (const auto& [section, body] : j.items()) {
    if (!body.is_object())
      throw std::runtime_error("config section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      std::string text;
      if (value.is_string()) text = value.get<std::string>();
      else if (value.is_array()) {
        for (const auto& v : value) {
          if (!text.empty()) text += ",";
          text += v.is_string() ? v.get<std::string>() : v.dump();
        }
      } else text = value.dump();
      apply_key(cfg, section, key, text);
    }
  }
  validate_config(cfg);
  return cfg;
}

nlohmann::json AuditConfig::to_json() const {
  nlohmann::json j;
  j["dataset"]["path"] = dataset_path;
  j["dataset"]["label"] = label;
  if (!dataset_name.empty()) j["dataset"]["name"] = dataset_name;
  nlohmann::json cat = nlohmann::json::array(), num = nlohmann::json::array();
  for (const auto& [name, kind] : kind_overrides)
    (kind == ColumnKind::categorical ? cat : num).push_back(name);
  if (!cat.empty()) j["dataset"]["categorical"] = cat;
  if (!num.empty()) j["dataset"]["numeric"] = num;
  if (!qi_columns.empty()) j["dataset"]["qi"] = qi_columns;
  nlohmann::json rs = nlohmann::json::array();
  for (Regime r : regimes) rs.push_back(regime_name(r));
  j["audit"]["regimes"] = rs;
  nlohmann::json ks = nlohmann::json::array();
  for (ModelKind k : kinds) ks.push_back(kind_name(k));
  j["audit"]["kinds"] = ks;
  j["audit"]["out"] = out_dir;
  j["audit"]["jobs"] = jobs;
  nlohmann::json fs = nlohmann::json::array();
  for (AttackFamily f : families) fs.push_back(family_name(f));
  j["attacks"]["families"] = fs;
  j["attacks"]["reference_models_online"] = reference_models_online;
  j["attacks"]["reference_models_offline"] = reference_models_offline;
  j["attacks"]["rmia_gamma"] = rmia_gamma;
  j["attacks"]["rmia_offline_a"] = rmia_offline_a;
  j["attacks"]["top_k"] = top_k;
  j["attacks"]["percentile_threshold"] = percentile_threshold;
  j["attacks"]["percentile_t"] = percentile_t;
  if (!surrogate_kinds.empty()) {
    nlohmann::json ss = nlohmann::json::array();
    for (ModelKind k : surrogate_kinds) ss.push_back(kind_name(k));
    j["attacks"]["surrogates"] = ss;
  }
  j["seeds"]["master"] = seed;
  j["seeds"]["sweep"] = sweep;
  j["federated"]["participants"] = participants;
  j["federated"]["rounds"] = rounds;
  j["federated"]["local_epochs"] = local_epochs;
  j["federated"]["trees_per_round"] = trees_per_round;
  return j;
}

Dataset load_audit_dataset(const AuditConfig& cfg) {
  LoadOptions opts;
  opts.label = cfg.label;
  opts.kind_overrides = cfg.kind_overrides;
  opts.dataset_name = cfg.dataset_name;
  return load_csv(cfg.dataset_path, opts);
}

namespace {

std::string cell_stem(Regime r, ModelKind k, AttackFamily f, std::size_t seed_index) {
  return regime_name(r) + "_" + kind_name(k) + "_" + family_name(f) + "_s" +
         std::to_string(seed_index);
}

AttackSpec make_attack_spec(const AuditConfig& cfg, AttackFamily f, ModelKind surrogate,
                            std::uint64_t seed) {
  AttackSpec spec;
  spec.family = f;
  spec.surrogate_kind = surrogate;
  spec.n_reference_models = family_uses_online_pool(f) ? cfg.reference_models_online
                                                       : cfg.reference_models_offline;
  spec.rmia_gamma = cfg.rmia_gamma;
  spec.rmia_offline_a = cfg.rmia_offline_a;
  spec.top_k = cfg.top_k;
  spec.percentile_threshold = cfg.percentile_threshold;
  spec.percentile_t = cfg.percentile_t;
  spec.seed = seed;
  return spec;
}

std::string opt_str(const std::optional<double>& v) {
  return v ? nlohmann::json(*v).dump() : "";
}

}  // namespace

AuditOutcome run_audit(const AuditConfig& cfg, const Dataset& d) {
  AuditOutcome out;
  std::optional<SingleOutReport> singles;
  if (!cfg.qi_columns.empty())
    singles = detect_single_outs(d, qi_from_names(d, cfg.qi_columns));

  nlohmann::json seeds = nlohmann::json::array();
  for (std::size_t s = 0; s < cfg.sweep; ++s) {
    const std::uint64_t seed_s = derive_seed(cfg.seed, s);
    seeds.push_back(seed_s);
    const DataPartition part = make_partition(d, derive_seed(seed_s, 0));
    out.partitions["partition_s" + std::to_string(s)] = partition_to_json(part);

    // Reference pools are shared across regimes: they depend only on the
    // partition and the surrogate kind/mode.
    std::map<std::pair<ModelKind, bool>, ReferencePool> pools;
    auto get_pool = [&](ModelKind kind, bool online, std::size_t n) -> const ReferencePool& {
      const auto key = std::make_pair(kind, online);
      auto it = pools.find(key);
      if (it == pools.end()) {
        const std::uint64_t pseed = derive_seed(
            seed_s, 0x9000 + 2 * static_cast<std::uint64_t>(kind) + (online ? 1 : 0));
        it = pools.emplace(key, train_reference_pool(d, part, kind, n, online, pseed,
                                                     cfg.jobs == 0 ? 0 : cfg.jobs))
                 .first;
      }
      return it->second;
    };

    for (std::size_t ri = 0; ri < cfg.regimes.size(); ++ri) {
      const Regime regime = cfg.regimes[ri];
      for (std::size_t ki = 0; ki < cfg.kinds.size(); ++ki) {
        const ModelKind kind = cfg.kinds[ki];
        TargetCell tc;
        tc.regime = regime;
        tc.kind = kind;
        tc.seed_index = s;
        TrainedModel target;
        const std::uint64_t tseed =
            derive_seed(seed_s, 0x10000 + ri * cfg.kinds.size() + ki);
        try {
          if (regime == Regime::central_weak || regime == Regime::central_defended) {
            const GridRegime gr =
                regime == Regime::central_weak ? GridRegime::weak : GridRegime::defense;
            GridSearchResult gs = grid_search(kind, gr, d, part.target_train,
                                              part.target_test, tseed, cfg.jobs);
            target = std::move(gs.model);
            tc.generalization = gs.report;
            tc.best_hyper = gs.best_spec.hyper;
          } else {
            const auto shards =
                make_federated_shards(part, cfg.participants, derive_seed(tseed, 1));
            ModelSpec spec;
            spec.kind = kind;
            spec.seed = tseed;
            FederatedConfig fc;
            fc.n_participants = cfg.participants;
            fc.rounds = cfg.rounds;
            fc.local_epochs = cfg.local_epochs;
            fc.trees_per_round = cfg.trees_per_round;
            fc.seed = derive_seed(tseed, 2);
            target = train_federated(spec, d, shards, fc);
            tc.generalization = generalization_gap(target, d, part.target_train,
                                                   part.target_test);
          }
          tc.ok = true;
        } catch (const std::exception& e) {
          tc.error = e.what();
          out.partial_failures = true;
        }
        out.targets.push_back(tc);

        for (std::size_t fi = 0; fi < cfg.families.size(); ++fi) {
          const AttackFamily family = cfg.families[fi];
          AuditCell cell;
          cell.regime = regime;
          cell.kind = kind;
          cell.family = family;
          cell.seed_index = s;
          cell.binary_scores = family == AttackFamily::metric_correctness;
          const std::uint64_t aseed = derive_seed(
              seed_s, 0x20000 + (ri * cfg.kinds.size() + ki) * cfg.families.size() + fi);
          try {
            if (!tc.ok) throw std::runtime_error("target training failed: " + tc.error);
            const AttackSpec spec = make_attack_spec(cfg, family, kind, aseed);
            const ReferencePool* pool = nullptr;
            if (family_uses_reference_pool(family))
              pool = &get_pool(kind, family_uses_online_pool(family),
                               resolve_reference_models(spec, d.n_rows()));
            cell.result = run_attack(target, d, part, spec, cfg.jobs, pool);
            cell.metrics = evaluate_attack(cell.result, {}, singles ? &*singles : nullptr,
                                           derive_seed(aseed, 0xB0));
            cell.ok = true;
          } catch (const std::exception& e) {
            cell.error = e.what();
            out.partial_failures = true;
          }
          out.cells.push_back(std::move(cell));
        }
      }
    }
  }

  // metrics.csv: one row per requested cell, error rows included.
  std::ostringstream csv;
  csv << "regime,kind,family,seed_index,auc,auc_lo,auc_hi,tpr_at_fpr_0.01,advantage,"
         "accuracy,precision,recall,f1,single_out_capture,error\n";
  nlohmann::json cells = nlohmann::json::array();
  for (const AuditCell& c : out.cells) {
    nlohmann::json j;
    j["regime"] = regime_name(c.regime);
    j["kind"] = kind_name(c.kind);
    j["family"] = family_name(c.family);
    j["seed_index"] = c.seed_index;
    j["binary_scores"] = c.binary_scores;
    csv << regime_name(c.regime) << ',' << kind_name(c.kind) << ','
        << family_name(c.family) << ',' << c.seed_index << ',';
    if (c.ok) {
      j["metrics"] = c.metrics.to_json();
      const std::string stem = cell_stem(c.regime, c.kind, c.family, c.seed_index);
      out.attack_csvs["attack_" + stem] = c.result.to_csv();
      if (!c.binary_scores)
        out.roc_csvs["roc_" + stem] = roc_curve(c.result.score, c.result.truth).to_csv();
      csv << nlohmann::json(c.metrics.auc).dump() << ','
          << nlohmann::json(c.metrics.auc_ci.lo).dump() << ','
          << nlohmann::json(c.metrics.auc_ci.hi).dump() << ','
          << nlohmann::json(c.metrics.tpr_at_fpr.at(0.01)).dump() << ','
          << nlohmann::json(c.metrics.advantage).dump() << ','
          << nlohmann::json(c.metrics.classification.accuracy).dump() << ','
          << opt_str(c.metrics.classification.precision) << ','
          << opt_str(c.metrics.classification.recall) << ','
          << opt_str(c.metrics.classification.f1) << ','
          << opt_str(c.metrics.single_out_capture) << ",\n";
    } else {
      j["error"] = c.error;
      std::string msg = c.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      csv << ",,,,,,,,,," << msg << "\n";
    }
    cells.push_back(std::move(j));
  }
  out.metrics_csv = csv.str();

  nlohmann::json targets = nlohmann::json::array();
  for (const TargetCell& t : out.targets) {
    nlohmann::json j;
    j["regime"] = regime_name(t.regime);
    j["kind"] = kind_name(t.kind);
    j["seed_index"] = t.seed_index;
    if (t.ok) {
      j["train_accuracy"] = t.generalization.train_accuracy;
      j["test_accuracy"] = t.generalization.test_accuracy;
      j["gap"] = t.generalization.gap;
      if (!t.best_hyper.is_null()) j["best_hyper"] = t.best_hyper;
    } else {
      j["error"] = t.error;
    }
    targets.push_back(std::move(j));
  }

  nlohmann::json report;
  report["toolkit_version"] = kToolkitVersion;
  report["config"] = cfg.to_json();
  report["dataset"] = {{"name", d.name()},
                       {"rows", d.n_rows()},
                       {"features", d.n_features()},
                       {"classes", d.n_classes()},
                       {"dropped_rows", d.dropped_rows()}};
  report["seeds"] = seeds;
  report["targets"] = targets;
  report["cells"] = cells;
  if (singles) {
    report["single_outs"] = {{"count", singles->single_out_indices.size()},
                             {"indices", singles->single_out_indices}};
  }
  report["partial_failures"] = out.partial_failures;
  out.report = std::move(report);
  return out;
}

TransferOutcome run_transfer(const AuditConfig& cfg, const Dataset& d) {
  const DataPartition part = make_partition(d, derive_seed(cfg.seed, 0));
  const std::vector<ModelKind>& surrogates =
      cfg.surrogate_kinds.empty() ? cfg.kinds : cfg.surrogate_kinds;
  const auto cells = run_transfer_matrix(d, part, cfg.families, cfg.kinds, surrogates,
                                         derive_seed(cfg.seed, 1), cfg.jobs);
  TransferOutcome out;
  nlohmann::json jcells = nlohmann::json::array();
  for (AttackFamily f : cfg.families) {
    std::ostringstream csv;
    csv << "target,surrogate,baseline,auc,advantage,best_surrogate,error\n";
    // the off-diagonal maximum per target row, the table's bolding rule
    std::map<ModelKind, double> best_auc;
    std::map<ModelKind, ModelKind> best_kind;
    for (const TransferCell& c : cells) {
      if (c.family != f || !c.ok || c.baseline) continue;
      const double a = auc(c.result.score, c.result.truth);
      auto it = best_auc.find(c.target_kind);
      if (it == best_auc.end() || a > it->second) {
        best_auc[c.target_kind] = a;
        best_kind[c.target_kind] = c.surrogate_kind;
      }
    }
    for (const TransferCell& c : cells) {
      if (c.family != f) continue;
      nlohmann::json j;
      j["family"] = family_name(f);
      j["target"] = kind_name(c.target_kind);
      j["surrogate"] = kind_name(c.surrogate_kind);
      j["baseline"] = c.baseline;
      csv << kind_name(c.target_kind) << ',' << kind_name(c.surrogate_kind) << ','
          << (c.baseline ? 1 : 0) << ',';
      if (c.ok) {
        const double a = auc(c.result.score, c.result.truth);
        const double adv = advantage(c.result.predicted, c.result.truth);
        const bool best = !c.baseline && best_kind.count(c.target_kind) &&
                          best_kind[c.target_kind] == c.surrogate_kind;
        j["auc"] = a;
        j["advantage"] = adv;
        j["best_surrogate"] = best;
        csv << nlohmann::json(a).dump() << ',' << nlohmann::json(adv).dump() << ','
            << (best ? 1 : 0) << ",\n";
      } else {
        j["error"] = c.error;
        out.partial_failures = true;
        std::string msg = c.error;
        std::replace(msg.begin(), msg.end(), ',', ';');
        csv << ",,," << msg << "\n";
      }
      jcells.push_back(std::move(j));
    }
    out.family_csvs["transfer_" + family_name(f)] = csv.str();
  }
  out.report["toolkit_version"] = kToolkitVersion;
  out.report["config"] = cfg.to_json();
  out.report["cells"] = jcells;
  out.report["partial_failures"] = out.partial_failures;
  return out;
}

nlohmann::json run_singleouts(const AuditConfig& cfg, const Dataset& d) {
  if (cfg.qi_columns.empty())
    throw std::runtime_error("config: singleouts needs qi columns in [dataset]");
  const SingleOutReport singles = detect_single_outs(d, qi_from_names(d, cfg.qi_columns));
  nlohmann::json report;
  report["toolkit_version"] = kToolkitVersion;
  report["qi"] = cfg.qi_columns;
  report["single_out_count"] = singles.single_out_indices.size();
  report["single_out_indices"] = singles.single_out_indices;
  nlohmann::json sizes = nlohmann::json::object();
  std::map<std::size_t, std::size_t> histogram;  // f_k -> number of classes
  for (const auto& [key, f] : singles.equivalence_class_sizes) ++histogram[f];
  for (const auto& [f, count] : histogram) sizes[std::to_string(f)] = count;
  report["class_size_histogram"] = sizes;

  // capture rates of each requested attack against plainly trained targets
  const DataPartition part = make_partition(d, derive_seed(cfg.seed, 0));
  nlohmann::json capture = nlohmann::json::array();
  for (std::size_t ki = 0; ki < cfg.kinds.size(); ++ki) {
    ModelSpec tspec;
    tspec.kind = cfg.kinds[ki];
    tspec.seed = derive_seed(cfg.seed, 0x5000 + ki);
    nlohmann::json row;
    row["kind"] = kind_name(cfg.kinds[ki]);
    try {
      const TrainedModel target = train_model(tspec, d, part.target_train);
      for (std::size_t fi = 0; fi < cfg.families.size(); ++fi) {
        const AttackSpec spec =
            make_attack_spec(cfg, cfg.families[fi], cfg.kinds[ki],
                             derive_seed(cfg.seed, 0x6000 + ki * cfg.families.size() + fi));
        const AttackResult r = run_attack(target, d, part, spec, cfg.jobs);
        const auto rate = single_out_capture_rate(r, singles);
        row[family_name(cfg.families[fi])] =
            rate ? nlohmann::json(*rate) : nlohmann::json(nullptr);
      }
    } catch (const std::exception& e) {
      row["error"] = e.what();
    }
    capture.push_back(std::move(row));
  }
  report["capture_rates"] = capture;
  return report;
}

void write_audit_outputs(const AuditConfig& cfg, const AuditOutcome& outcome) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  auto write = [&](const std::string& name, const std::string& contents) {
    std::ofstream f(fs::path(cfg.out_dir) / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write output file: " + name);
    f << contents;
  };
  write("report.json", outcome.report.dump(2) + "\n");
  write("metrics.csv", outcome.metrics_csv);
  for (const auto& [stem, contents] : outcome.roc_csvs) write(stem + ".csv", contents);
  for (const auto& [stem, contents] : outcome.attack_csvs) write(stem + ".csv", contents);
  for (const auto& [stem, j] : outcome.partitions) write(stem + ".json", j.dump(2) + "\n");
}

}  // namespace mia
