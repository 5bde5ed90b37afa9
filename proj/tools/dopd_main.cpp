// Copyright 2026 The dopd Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// dopd: run distributed online primal-dual push-sum experiments, validate
// graph sequences and fit regret rates.
//
//   dopd run --preset pev50-q4 --out results
//   dopd validate graphs.txt --period 4
//   dopd rates results/metrics_*.csv --kappa 0.2

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dopd/commands.hpp"
#include "dopd/config.hpp"
#include "dopd/engine.hpp"

namespace {

struct RunFlags {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<double> kappa;
  std::optional<std::int64_t> horizon;
  std::optional<std::string> algorithm;
  bool allow_any_kappa = false;
  bool print_config = false;
};

int RunCommand(const RunFlags& flags) {
  dopd::ExperimentConfig config;
  try {
    if (!flags.config_path.empty()) {
      config = dopd::LoadConfig(flags.config_path);
    } else if (!flags.preset.empty()) {
      config = dopd::Preset(flags.preset);
    }
    if (flags.seed) {
      config.problem.seed = *flags.seed;
      config.graph.seed = *flags.seed;
      config.seed = *flags.seed;
    }
    if (flags.out_dir) config.out_dir = *flags.out_dir;
    if (flags.kappa) config.kappa = *flags.kappa;
    if (flags.horizon) config.horizon = *flags.horizon;
    if (flags.algorithm) {
      config.algorithm = dopd::ParseAlgorithm(*flags.algorithm);
      if (config.algorithm == dopd::Algorithm::kBalanced) config.graph.balanced = true;
    }
    if (flags.allow_any_kappa) config.allow_any_kappa = true;
  } catch (const dopd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return dopd::ExitCodeFor(e.code());
  }
  if (flags.print_config) {
    dopd::WriteConfig(std::cout, config);
    return dopd::kExitOk;
  }
  return dopd::CmdRun(config, std::cout, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed online primal-dual push-sum over time-varying digraphs"};
  app.require_subcommand(1);

  RunFlags run;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment and write its CSV files");
  auto* config_opt = run_cmd->add_option("--config", run.config_path, "Experiment config file");
  run_cmd->add_option("--preset", run.preset, "Built-in experiment")->excludes(config_opt);
  run_cmd->add_option("--seed", run.seed, "Seed for problem, graphs and run label");
  run_cmd->add_option("--out", run.out_dir, "Output directory");
  run_cmd->add_option("--kappa", run.kappa, "Dual regularization exponent");
  run_cmd->add_option("--horizon", run.horizon, "Number of rounds T");
  run_cmd->add_option("--alg", run.algorithm, "pushsum, balanced or centralized")
      ->check(CLI::IsMember({"pushsum", "balanced", "centralized"}));
  run_cmd->add_flag("--allow-any-kappa", run.allow_any_kappa, "Accept kappa outside (0, 1/4)");
  run_cmd->add_flag("--print-config", run.print_config, "Print the resolved config and exit");

  dopd::ValidateOptions validate;
  auto* validate_cmd =
      app.add_subcommand("validate", "Check a graph sequence file against the connectivity "
                                     "and weight conditions");
  validate_cmd->add_option("graph", validate.graph_path, "Graph sequence file")->required();
  validate_cmd->add_option("--a-min", validate.a_min, "Weight lower bound (default: smallest)");
  validate_cmd->add_option("--period", validate.period_q, "Connectivity period Q");
  validate_cmd->add_option("--horizon", validate.horizon, "Last round to check");
  validate_cmd->add_flag("--strict-rows", validate.strict_rows, "Also require row sums <= 1");

  dopd::RatesOptions rates;
  auto* rates_cmd = app.add_subcommand("rates", "Fit log-log rates to metrics CSV files");
  rates_cmd->add_option("files", rates.paths, "metrics_*.csv files")->required();
  rates_cmd->add_option("--kappa", rates.kappa, "Kappa of the runs");
  rates_cmd->add_option("--window", rates.window, "Fraction of the log-t range to fit");
  rates_cmd->add_option("--margin", rates.margin, "Allowed excess over the bound");
  rates_cmd->add_flag("--time-invariant", rates.time_invariant,
                      "Compare violation with the time-invariant bound");

  auto* presets_cmd = app.add_subcommand("presets", "List built-in experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? dopd::kExitOk : dopd::kExitConfig;
  }

  if (*run_cmd) return RunCommand(run);
  if (*validate_cmd) return dopd::CmdValidate(validate, std::cout, std::cerr);
  if (*rates_cmd) return dopd::CmdRates(rates, std::cout, std::cerr);
  if (*presets_cmd) {
    for (const auto& name : dopd::PresetNames()) std::cout << name << '\n';
    return dopd::kExitOk;
  }
  return dopd::kExitConfig;
}
