// snn: sweeps, single-network training, spectral analysis and reports.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "snn/checkpoint.hpp"
#include "snn/config.hpp"
#include "snn/experiment.hpp"
#include "snn/spectral.hpp"
#include "snn/topology.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::size_t workers = 0;  // 0: take the config value
  std::string out = "out";
  std::string profile = "desk";
  std::optional<std::uint64_t> base_seed;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--workers", flags.workers, "Parallel cells (default: config value or 1)");
  cmd->add_option("--out", flags.out, "Output directory")->capture_default_str();
  cmd->add_option("--profile", flags.profile, "desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}))
      ->capture_default_str();
  cmd->add_option("--base-seed", flags.base_seed, "Base seed, overrides the config");
}

snn::ExperimentConfig load(const std::string& path, const CommonFlags& flags) {
  auto cfg = snn::load_config(path, snn::parse_profile(flags.profile));
  if (flags.base_seed) cfg.sweep.base_seed = *flags.base_seed;
  if (flags.workers > 0) cfg.workers = flags.workers;
  return cfg;
}

void write_table(const fs::path& path, const snn::csv::Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw snn::Error(snn::ErrorCode::Io, "cannot open " + path.string());
  table.write(out);
}

int run_sweep_command(const std::string& config, const CommonFlags& flags) {
  const auto cfg = load(config, flags);
  snn::RunOptions opts;
  opts.out_dir = flags.out;
  opts.workers = cfg.workers;
  opts.log = &std::cerr;
  const auto summary = snn::run_sweep(cfg.sweep, opts);
  std::cout << summary.csv_path.string() << ": " << summary.resumed << " resumed, " << summary.written
            << " written, " << summary.failed << " failed of " << summary.total << '\n';
  return summary.failed == 0 ? 0 : 2;
}

int run_train_command(const std::string& config, const CommonFlags& flags) {
  const auto cfg = load(config, flags);
  const auto data = snn::load_data(cfg.sweep.dataset);
  auto net = snn::init_network(snn::single_network_config(cfg, data.train));
  const auto record = snn::train(net, data.train, data.test, [](const snn::EpochRecord& e) {
    std::cerr << "epoch " << e.epoch << " loss " << snn::csv::format(e.train_loss) << " accuracy "
              << snn::csv::format(e.test_accuracy) << '\n';
  });

  const fs::path dir = flags.out;
  fs::create_directories(dir);
  snn::csv::Table epochs;
  epochs.header = {"epoch", "train_loss", "test_accuracy"};
  epochs.rows.push_back({"0", "", snn::csv::format(record.initial_accuracy)});
  for (const auto& e : record.epochs)
    epochs.rows.push_back({std::to_string(e.epoch), snn::csv::format(e.train_loss), snn::csv::format(e.test_accuracy)});
  write_table(dir / "train_record.csv", epochs);

  snn::csv::Table stats;
  stats.header = {"layer", "construction", "k", "stored", "max", "min", "std"};
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& w = record.weight_stats[l];
    stats.rows.push_back({std::to_string(l), std::string(snn::to_string(net.layers[l].construction.kind)),
                          std::to_string(net.layers[l].construction.k), std::to_string(w.count),
                          snn::csv::format(w.max), snn::csv::format(w.min), snn::csv::format(w.std)});
  }
  write_table(dir / "weight_stats.csv", stats);
  snn::save_checkpoint(dir / "network.snnc", net);
  std::cout << "final accuracy " << snn::csv::format(record.final_accuracy()) << " in "
            << snn::csv::format(record.wall_seconds) << " s; wrote " << (dir / "network.snnc").string() << '\n';
  return 0;
}

int run_analyze_command(const std::string& topology_file, bool eigenvalues) {
  std::ifstream in(topology_file);
  if (!in) throw snn::Error(snn::ErrorCode::Io, "cannot open " + topology_file);
  const auto report = snn::analyze(snn::read_edge_list(in));
  snn::csv::Table table;
  table.header = snn::spectral_csv_header();
  table.rows.push_back(snn::to_csv_row(report));
  table.write(std::cout);
  if (eigenvalues)
    for (double v : report.eigenvalues) std::cout << snn::csv::format(v) << '\n';
  return 0;
}

int run_report_command(const std::string& sweep_csv, const std::optional<std::string>& out) {
  const auto table = snn::read_sweep(sweep_csv);
  const fs::path dir = out ? fs::path(*out) : fs::path(sweep_csv).parent_path() / "report";
  for (const auto& path : snn::write_reports(table, dir)) std::cout << path.string() << '\n';
  return 0;
}

int run_topology_command(const std::string& kind, std::size_t n, std::size_t m, std::size_t k,
                         const std::optional<std::uint64_t>& seed) {
  const auto t = snn::build({snn::parse_construction(kind), k, seed}, n, m);
  snn::write_edge_list(std::cout, t);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse neural network topologies: sweeps, training, spectra, reports"};
  app.require_subcommand(1);

  CommonFlags sweep_flags, train_flags;
  std::string sweep_config, train_config, topology_file, sweep_csv;

  auto* sweep = app.add_subcommand("sweep", "Run a construction x degree sweep; resumes an existing sweep.csv");
  sweep->add_option("config", sweep_config, "INI config file")->required()->check(CLI::ExistingFile);
  add_common(sweep, sweep_flags);

  auto* train = app.add_subcommand("train", "Train one network and write its record and checkpoint");
  train->add_option("config", train_config, "INI config file")->required()->check(CLI::ExistingFile);
  add_common(train, train_flags);

  bool eigenvalues = false;
  auto* analyze = app.add_subcommand("analyze", "Spectral report for one edge-list topology");
  analyze->add_option("topology", topology_file, "Edge-list file")->required()->check(CLI::ExistingFile);
  analyze->add_flag("--eigenvalues", eigenvalues, "Also print every eigenvalue");

  std::optional<std::string> report_out;
  auto* report = app.add_subcommand("report", "Figure tables and correlations from a sweep CSV");
  report->add_option("sweep_csv", sweep_csv, "sweep.csv written by `snn sweep`")->required()->check(CLI::ExistingFile);
  report->add_option("--out", report_out, "Output directory (default: <csv dir>/report)");

  std::string kind;
  std::size_t n = 0, m = 0, k = 0;
  std::optional<std::uint64_t> seed;
  auto* topology = app.add_subcommand("topology", "Print the edge list of one construction");
  topology->add_option("construction", kind, "e.g. regular_rotating")->required();
  topology->add_option("n", n, "Left layer size")->required();
  topology->add_option("m", m, "Right layer size")->required();
  topology->add_option("k", k, "Degree (ignored for fully_connected)")->required();
  topology->add_option("--seed", seed, "Seed for random constructions");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sweep) return run_sweep_command(sweep_config, sweep_flags);
    if (*train) return run_train_command(train_config, train_flags);
    if (*analyze) return run_analyze_command(topology_file, eigenvalues);
    if (*report) return run_report_command(sweep_csv, report_out);
    if (*topology) return run_topology_command(kind, n, m, k, seed);
  } catch (const snn::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
