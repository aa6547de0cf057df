// Copyright 2026 The MPQ Authors
//
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

// mpq: experiment runner.
//
//   mpq run   --config cfg.json [--out dir] [--seed s] [--episodes n] [--horizon h]
//   mpq eval  --config cfg.json [--checkpoint f.qnet] [--episodes n]
//             [--horizon h] [--seed s] [--out dir]
//   mpq suite --config suite.json --out dir [--seed s]

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mpq/config.h"
#include "mpq/harness.h"

namespace {

using mpq::Json;

int RunCommand(const std::string& config_path, std::string out_dir,
               const mpq::Overrides& overrides) {
  Json j = mpq::ApplyOverrides(mpq::ReadJsonFile(config_path), overrides);
  if (out_dir.empty()) out_dir = j.value("output", std::string("runs/latest"));
  const mpq::ExperimentConfig config = mpq::ParseConfig(j);
  mpq::RunOutcome outcome = mpq::RunExperiment(config, out_dir);
  if (outcome.exit_code != 0) {
    std::cerr << "error: " << outcome.message << "\n";
    return outcome.exit_code;
  }
  std::cout << "wrote " << out_dir << "\n";
  if (outcome.report) {
    std::cout << "eval mean_cost=" << outcome.report->mean_cost
              << " success_rate=" << outcome.report->success_rate << "\n";
  }
  return mpq::kExitOk;
}

int EvalCommand(const std::string& config_path, const std::string& checkpoint,
                const std::string& out_dir, const mpq::Overrides& overrides) {
  Json j = mpq::ApplyOverrides(mpq::ReadJsonFile(config_path), {});
  const mpq::ExperimentConfig config = mpq::ParseConfig(j);
  const int episodes = overrides.episodes.value_or(config.eval.episodes);
  const uint64_t seed = overrides.seed.value_or(config.eval.seed);
  const int horizon = overrides.horizon.value_or(0);
  mpq::EvalReport report =
      mpq::EvaluateCheckpoint(checkpoint, config, episodes, horizon, seed);
  const Json out = mpq::ReportToJson(report);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    mpq::ExperimentConfig echo = config;
    echo.eval.seed = seed;
    const int h = horizon > 0 ? horizon : config.mppi.horizon;
    mpq::WriteMetricsCsv(
        (std::filesystem::path(out_dir) / "eval.csv").string(),
        mpq::EvalRows(echo, report, h));
    mpq::WriteText((std::filesystem::path(out_dir) / "eval_report.json").string(),
                   out.dump(2) + "\n");
  }
  std::cout << "episodes=" << report.episodes
            << " mean_cost=" << report.mean_cost
            << " stddev_cost=" << report.stddev_cost
            << " success_rate=" << report.success_rate << "\n";
  return mpq::kExitOk;
}

int SuiteCommand(const std::string& suite_path, const std::string& out_dir,
                 std::optional<uint64_t> seed) {
  Json suite = mpq::ReadJsonFile(suite_path);
  if (seed) suite["seeds"] = Json::array({*seed});
  std::string out = out_dir;
  if (out.empty()) out = suite.value("output", std::string("runs/suite"));
  mpq::SuiteOutcome outcome = mpq::RunSuite(suite, out);
  std::cout << "ran " << outcome.cells_run << " runs into " << out << "\n";
  for (const std::string& f : outcome.failures) std::cerr << "failed: " << f << "\n";
  if (outcome.exit_code == mpq::kExitPartial) {
    std::cerr << "suite partial: " << outcome.cells_failed << " of "
              << outcome.cells_run << " runs failed\n";
  }
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model predictive Q-learning experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string checkpoint;
  std::optional<uint64_t> seed;
  std::optional<int> episodes;
  std::optional<int> horizon;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "config file (JSON, comments allowed)")
        ->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "seed override");
  };

  CLI::App* run = app.add_subcommand("run", "train and/or evaluate one experiment");
  add_common(run);
  run->add_option("--episodes", episodes, "episode count override");
  run->add_option("--horizon", horizon, "MPC horizon override");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint,
                   "Q-network checkpoint (omit for plain MPPI)");
  eval->add_option("--episodes", episodes, "evaluation episodes");
  eval->add_option("--horizon", horizon, "MPC horizon");

  CLI::App* suite = app.add_subcommand("suite", "run a baseline matrix");
  add_common(suite);

  CLI11_PARSE(app, argc, argv);

  try {
    mpq::Overrides o{seed, episodes, horizon};
    if (run->parsed()) return RunCommand(config_path, out_dir, o);
    if (eval->parsed()) return EvalCommand(config_path, checkpoint, out_dir, o);
    if (suite->parsed()) return SuiteCommand(config_path, out_dir, seed);
  } catch (const mpq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return mpq::kExitConfig;
  } catch (const mpq::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return mpq::kExitConfig;
  } catch (const mpq::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return mpq::kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mpq::kExitConfig;
  }
  return mpq::kExitOk;
}
