// miaudit: config-driven membership-inference auditing for tabular models.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "mia/audit.hpp"
#include "mia/synthetic.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitPartialFailures = 3;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t jobs = 0;
  bool jobs_set = false;
  std::vector<std::string> regimes;
  std::vector<std::string> families;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required = true) {
  auto* copt = cmd->add_option("--config", f.config_path, "audit config file (text or json)");
  if (config_required) copt->required();
  cmd->add_option("--out", f.out_dir, "output directory (overrides the config)");
  cmd->add_option("--seed", f.seed, "master seed (overrides the config)")
      ->each([&](const std::string&) { f.seed_set = true; });
  cmd->add_option("--jobs", f.jobs, "worker threads, 0 = all processors")
      ->each([&](const std::string&) { f.jobs_set = true; });
  cmd->add_option("--regime", f.regimes, "restrict to these regimes");
  cmd->add_option("--family", f.families, "restrict to these attack families");
}

mia::AuditConfig load_config(const CommonFlags& f) {
  mia::AuditConfig cfg = mia::parse_config_file(f.config_path);
  if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
  if (f.seed_set) cfg.seed = f.seed;
  if (f.jobs_set) cfg.jobs = f.jobs;
  if (!f.regimes.empty()) {
    cfg.regimes.clear();
    for (const auto& r : f.regimes) cfg.regimes.push_back(mia::regime_from_name(r));
  }
  if (!f.families.empty()) {
    cfg.families.clear();
    for (const auto& a : f.families) cfg.families.push_back(mia::family_from_name(a));
  }
  return cfg;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << contents;
}

int cmd_ingest(const CommonFlags& flags) {
  const mia::AuditConfig cfg = load_config(flags);
  const mia::Dataset d = mia::load_audit_dataset(cfg);
  std::cout << d.n_rows() << " rows, " << d.n_features() << " features, " << d.n_classes()
            << " labels\n";
  if (d.dropped_rows() > 0)
    std::cout << d.dropped_rows() << " rows dropped for missing values\n";
  nlohmann::json manifest;
  manifest["name"] = d.name();
  manifest["rows"] = d.n_rows();
  manifest["features"] = d.n_features();
  manifest["classes"] = d.n_classes();
  manifest["dropped_rows"] = d.dropped_rows();
  nlohmann::json cols = nlohmann::json::array();
  for (std::size_t c = 0; c < d.n_columns(); ++c) {
    const auto& schema = d.column(c).schema;
    nlohmann::json jc;
    jc["name"] = schema.name;
    jc["kind"] = schema.kind == mia::ColumnKind::numeric ? "numeric" : "categorical";
    if (schema.kind == mia::ColumnKind::categorical)
      jc["categories"] = schema.categories.size();
    jc["label"] = c == d.label_column();
    cols.push_back(std::move(jc));
  }
  manifest["columns"] = cols;
  write_file(std::filesystem::path(cfg.out_dir) / "dataset_manifest.json",
             manifest.dump(2) + "\n");
  return kExitOk;
}

int cmd_audit(const CommonFlags& flags) {
  const mia::AuditConfig cfg = load_config(flags);
  const mia::Dataset d = mia::load_audit_dataset(cfg);
  const mia::AuditOutcome outcome = mia::run_audit(cfg, d);
  mia::write_audit_outputs(cfg, outcome);
  std::size_t ok = 0;
  for (const auto& c : outcome.cells) ok += c.ok ? 1 : 0;
  std::cout << "audit: " << ok << "/" << outcome.cells.size() << " attack cells succeeded, "
            << "report written to " << cfg.out_dir << "/report.json\n";
  return outcome.partial_failures ? kExitPartialFailures : kExitOk;
}

int cmd_transfer(const CommonFlags& flags) {
  const mia::AuditConfig cfg = load_config(flags);
  const mia::Dataset d = mia::load_audit_dataset(cfg);
  const mia::TransferOutcome outcome = mia::run_transfer(cfg, d);
  std::filesystem::create_directories(cfg.out_dir);
  write_file(std::filesystem::path(cfg.out_dir) / "transfer_report.json",
             outcome.report.dump(2) + "\n");
  for (const auto& [stem, csv] : outcome.family_csvs)
    write_file(std::filesystem::path(cfg.out_dir) / (stem + ".csv"), csv);
  std::cout << "transfer: " << outcome.report["cells"].size() << " cells written to "
            << cfg.out_dir << "\n";
  return outcome.partial_failures ? kExitPartialFailures : kExitOk;
}

int cmd_singleouts(const CommonFlags& flags) {
  const mia::AuditConfig cfg = load_config(flags);
  const mia::Dataset d = mia::load_audit_dataset(cfg);
  const nlohmann::json report = mia::run_singleouts(cfg, d);
  write_file(std::filesystem::path(cfg.out_dir) / "singleouts.json", report.dump(2) + "\n");
  std::cout << report["single_out_count"].get<std::size_t>() << " single-outs, report in "
            << cfg.out_dir << "/singleouts.json\n";
  return kExitOk;
}

int cmd_report(const std::string& report_path) {
  std::ifstream in(report_path);
  if (!in) throw std::runtime_error("cannot open report: " + report_path);
  const nlohmann::json report = nlohmann::json::parse(in);
  std::cout << "toolkit " << report.value("toolkit_version", "?") << ", dataset "
            << report["dataset"]["name"].get<std::string>() << " ("
            << report["dataset"]["rows"] << " rows)\n";
  std::cout << "regime,kind,family,seed,auc,advantage\n";
  for (const auto& cell : report["cells"]) {
    std::cout << cell["regime"].get<std::string>() << ','
              << cell["kind"].get<std::string>() << ',' << cell["family"].get<std::string>()
              << ',' << cell["seed_index"] << ',';
    if (cell.contains("metrics"))
      std::cout << cell["metrics"]["auc"] << ',' << cell["metrics"]["advantage"];
    else
      std::cout << "error: " << cell["error"].get<std::string>();
    std::cout << '\n';
  }
  return kExitOk;
}

int cmd_synth(const std::string& out_path, std::size_t rows, std::size_t singles,
              std::uint64_t seed) {
  const mia::Dataset d = singles > 0 ? mia::make_singleout_dataset(rows, singles, seed)
                                     : mia::make_overfit_dataset(rows, seed);
  if (!std::filesystem::path(out_path).parent_path().empty())
    std::filesystem::create_directories(std::filesystem::path(out_path).parent_path());
  mia::write_csv(d, out_path);
  std::cout << "wrote " << d.n_rows() << " rows to " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"membership-inference auditing for tabular models"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* ingest = app.add_subcommand("ingest", "register a dataset and print its summary");
  add_common(ingest, flags);
  auto* audit = app.add_subcommand("audit", "run the configured end-to-end audit");
  add_common(audit, flags);
  auto* transfer = app.add_subcommand("transfer", "run the surrogate-transfer matrix");
  add_common(transfer, flags);
  auto* singleouts = app.add_subcommand("singleouts", "single-out report and capture rates");
  add_common(singleouts, flags);

  std::string report_path;
  auto* report = app.add_subcommand("report", "print a summary of an existing report.json");
  report->add_option("--in", report_path, "path to report.json")->required();

  std::string synth_out = "synthetic.csv";
  std::size_t synth_rows = 600, synth_singles = 0;
  std::uint64_t synth_seed = 1;
  auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark dataset");
  synth->add_option("--out", synth_out, "output csv path");
  synth->add_option("--rows", synth_rows, "row count");
  synth->add_option("--singles", synth_singles, "injected unique-QI rows (0 = none)");
  synth->add_option("--seed", synth_seed, "generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) return cmd_ingest(flags);
    if (audit->parsed()) return cmd_audit(flags);
    if (transfer->parsed()) return cmd_transfer(flags);
    if (singleouts->parsed()) return cmd_singleouts(flags);
    if (report->parsed()) return cmd_report(report_path);
    if (synth->parsed()) return cmd_synth(synth_out, synth_rows, synth_singles, synth_seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    // anything wrong with the config or its referenced inputs is a config error
    return kExitConfigError;
  }
  return kExitOk;
}
