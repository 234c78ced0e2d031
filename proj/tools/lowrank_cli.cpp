// lowrank: run experiment grids from a config file, or the invariant suite.
//
// Exit codes: 0 success, 1 runtime or selftest failure, 2 usage or config error.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lowrank/harness/config.hpp"
#include "lowrank/harness/csv.hpp"
#include "lowrank/harness/grid.hpp"
#include "lowrank/harness/selftest.hpp"

namespace {

int run_command(const std::string& config_path, const std::optional<std::string>& out_path,
                const std::optional<std::uint64_t>& seed) {
  lowrank::ExperimentConfig cfg;
  try {
    cfg = lowrank::load_config(config_path);
  } catch (const lowrank::ConfigError& e) {
    std::cerr << "lowrank: " << config_path << ": " << e.what() << '\n';
    return 2;
  }
  if (seed) cfg.base_seed = *seed;
  if (out_path) cfg.output = *out_path;

  const auto rows = lowrank::run_grid(cfg, &std::cerr);
  if (cfg.output.empty() || cfg.output == "-") {
    lowrank::write_csv(rows, std::cout);
    std::cout.flush();
  } else {
    lowrank::write_csv(rows, cfg.output);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scaled gradient descent experiments for low-rank matrix estimation"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run the experiment grid described by a config file");
  std::string config_path;
  std::optional<std::string> out_path;
  std::optional<std::uint64_t> seed;
  run->add_option("--config", config_path, "Config file (key = value lines)")->required();
  run->add_option("--out", out_path, "CSV output path, overrides the config; '-' for stdout");
  run->add_option("--seed", seed, "Base seed, overrides the config");

  auto* selftest = app.add_subcommand("selftest", "Run the quick invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return run_command(config_path, out_path, seed);
    if (*selftest) return lowrank::run_selftest(std::cout) ? 0 : 1;
  } catch (const lowrank::ArgumentError& e) {
    std::cerr << "lowrank: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "lowrank: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
