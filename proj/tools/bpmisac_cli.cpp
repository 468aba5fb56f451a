// Batch front end: one subcommand per experiment, each writing
// <out>/<subcommand>.csv plus a matching plot script.
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "bpmisac/config.hpp"
#include "bpmisac/harness.hpp"
#include "bpmisac/plot_script.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
  std::string config;
  std::string out = "results";
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
};

using Runner = std::function<bpmisac::CsvTable(const bpmisac::ExperimentConfig&, int)>;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BPM-ISAC transceiver design and Monte Carlo experiments"};
  app.require_subcommand(1);

  const std::map<std::string, std::pair<std::string, Runner>> commands = {
      {"design", {"per-channel design metrics", bpmisac::run_design}},
      {"ber", {"BER versus Eb/N0 per method and mu", bpmisac::run_ber_sweep}},
      {"tradeoff", {"BER and beampattern MSE across mu", bpmisac::run_tradeoff}},
      {"doa", {"MUSIC DoA RMSE and CRB versus sensing SNR", bpmisac::run_doa_rmse}},
      {"convergence", {"alternating-optimization objective traces", bpmisac::run_convergence}},
      {"apep", {"analytic APEP versus Eb/N0", bpmisac::run_apep}},
  };

  CommonOptions opts;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", opts.config, "key = value config file (defaults if omitted)");
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option_function<std::uint64_t>(
        "--seed", [&opts](std::uint64_t s) { opts.seed = s, opts.seed_given = true; },
        "master seed (overrides the config)");
    sub->add_option("--threads", opts.threads, "worker threads")->check(CLI::Range(1, 1024));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    bpmisac::ExperimentConfig cfg =
        opts.config.empty() ? bpmisac::ExperimentConfig{} : bpmisac::load_config(opts.config);
    if (opts.seed_given) cfg.seed = opts.seed;
    cfg.validate();

    std::filesystem::create_directories(opts.out);
    const std::string csv = (std::filesystem::path(opts.out) / (name + ".csv")).string();
    const std::string script = (std::filesystem::path(opts.out) / (name + "_plot.py")).string();
    const bpmisac::CsvTable table = commands.at(name).second(cfg, opts.threads);
    table.write(csv);
    bpmisac::emit_plot_script(csv, name, script);
    std::cout << "wrote " << csv << " (" << table.rows.size() << " rows, config "
              << cfg.hash() << ")\n";
    return 0;
  } catch (const bpmisac::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}
