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

#ifndef MPQ_HARNESS_H_
#define MPQ_HARNESS_H_

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpq/config.h"
#include "mpq/learner.h"
#include "mpq/qnetwork.h"

namespace mpq {

namespace fs = std::filesystem;

// Metrics CSV schema. Every file written by the harness starts with this
// header and every row carries all columns.
inline constexpr const char* kMetricsHeader =
    "episode,seed,agent,horizon,total_cost,success,mean_free_energy,"
    "mean_td_error,wall_seconds";

// combined suite CSV: two leading columns identify the cell and phase
inline constexpr const char* kCombinedHeader =
    "cell,phase,episode,seed,agent,horizon,total_cost,success,"
    "mean_free_energy,mean_td_error,wall_seconds";

struct MetricsRow {
  int episode = 0;
  uint64_t seed = 0;
  std::string agent;
  int horizon = 0;
  double total_cost = 0.0;
  bool success = false;
  double mean_free_energy = 0.0;
  double mean_td_error = 0.0;
  // simulated plant time elapsed at the end of the episode; wall-clock
  // timings go to run.log so that metrics files are reproducible
  double wall_seconds = 0.0;
};

inline std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string FormatRow(const MetricsRow& r) {
  std::ostringstream os;
  os << r.episode << ',' << r.seed << ',' << r.agent << ',' << r.horizon << ','
     << FormatDouble(r.total_cost) << ',' << (r.success ? 1 : 0) << ','
     << FormatDouble(r.mean_free_energy) << ','
     << FormatDouble(r.mean_td_error) << ',' << FormatDouble(r.wall_seconds);
  return os.str();
}

inline void WriteMetricsCsv(const std::string& path,
                            const std::vector<MetricsRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kMetricsHeader << '\n';
  for (const MetricsRow& r : rows) out << FormatRow(r) << '\n';
}

inline std::vector<MetricsRow> TrainingRows(const ExperimentConfig& c,
                                            const TrainResult& t) {
  std::vector<MetricsRow> rows;
  for (const EpisodeMetrics& m : t.metrics) {
    rows.push_back({m.episode, c.seed, AgentName(c.agent), t.mppi.horizon,
                    m.total_cost, m.success, m.mean_free_energy,
                    m.mean_td_error, m.interaction_seconds});
  }
  return rows;
}

inline std::vector<MetricsRow> EvalRows(const ExperimentConfig& c,
                                        const EvalReport& report,
                                        int horizon) {
  std::vector<MetricsRow> rows;
  const double episode_seconds = c.env.episode_steps * c.env.dt;
  for (const EvalEpisode& e : report.rows) {
    rows.push_back({e.episode, c.seed, AgentName(c.agent), horizon, e.total_cost,
                    e.success, e.mean_free_energy, 0.0,
                    e.episode * episode_seconds});
  }
  return rows;
}

inline Json ReportToJson(const EvalReport& r) {
  Json rows = Json::array();
  for (const EvalEpisode& e : r.rows) {
    rows.push_back({{"episode", e.episode},
                    {"total_cost", e.total_cost},
                    {"success", e.success},
                    {"mean_free_energy", e.mean_free_energy}});
  }
  return {{"episodes", r.episodes},
          {"mean_cost", r.mean_cost},
          {"stddev_cost", r.stddev_cost},
          {"success_rate", r.success_rate},
          {"rows", rows}};
}

inline void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

// Sidecar log; the only artifact that carries wall-clock time.
class RunLog {
 public:
  explicit RunLog(const std::string& path)
      : out_(path, std::ios::app), start_(std::chrono::steady_clock::now()) {}

  void Line(const std::string& message) {
    const auto now = std::chrono::system_clock::to_time_t(
        std::chrono::system_clock::now());
    const double elapsed = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start_)
                               .count();
    out_ << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ") << " +"
         << std::fixed << std::setprecision(3) << elapsed << "s " << message
         << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
  std::chrono::steady_clock::time_point start_;
};

struct RunOutcome {
  int exit_code = 0;
  std::string message;
  std::vector<MetricsRow> training_rows;
  std::vector<MetricsRow> eval_rows;
  std::optional<EvalReport> report;
};

// Exit codes shared by the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitPartial = 2;
inline constexpr int kExitNumerical = 3;

// Executes one experiment into `out_dir`:
//   config.resolved.json  resolved config (re-runnable as is)
//   metrics.csv           one row per training episode (mppi: eval episodes)
//   eval.csv, eval_report.json   evaluation against the true plant
//   final.qnet, best.qnet        checkpoints (learning agents)
//   run.log               wall-clock log
inline RunOutcome RunExperiment(const ExperimentConfig& config,
                                const std::string& out_dir) {
  RunOutcome outcome;
  fs::create_directories(out_dir);
  RunLog log((fs::path(out_dir) / "run.log").string());
  log.Line("start agent=" + AgentName(config.agent) + " env=" +
           config.env.name + " seed=" + std::to_string(config.seed) +
           " out=" + out_dir);
  WriteText((fs::path(out_dir) / "config.resolved.json").string(),
            ConfigToJson(config).dump(2) + "\n");
  try {
    const std::unique_ptr<Environment> env = MakeEnvironment(config.env);
    MPPIParams eval_mppi = config.mppi;
    const QNetwork* eval_net = nullptr;
    TrainResult trained;
    if (config.agent != AgentKind::kMppi) {
      trained = Train(ToTrainerConfig(config, *env));
      eval_mppi = trained.mppi;
      outcome.training_rows = TrainingRows(config, trained);
      WriteMetricsCsv((fs::path(out_dir) / "metrics.csv").string(),
                      outcome.training_rows);
      SaveCheckpoint(trained.final_net, (fs::path(out_dir) / "final.qnet").string());
      SaveCheckpoint(trained.best_net, (fs::path(out_dir) / "best.qnet").string());
      eval_net = config.eval.checkpoint == "best" ? &trained.best_net
                                                  : &trained.final_net;
      log.Line("trained episodes=" + std::to_string(config.learner.episodes) +
               " updates=" + std::to_string(trained.updates));
    }
    if (config.eval.episodes > 0) {
      EvalReport report = Evaluate(*env, eval_net, eval_mppi,
                                   config.eval.planner, config.eval.episodes,
                                   config.eval.seed, config.learner.episode_steps);
      outcome.eval_rows = EvalRows(config, report, eval_mppi.horizon);
      WriteMetricsCsv((fs::path(out_dir) / "eval.csv").string(),
                      outcome.eval_rows);
      WriteText((fs::path(out_dir) / "eval_report.json").string(),
                ReportToJson(report).dump(2) + "\n");
      if (config.agent == AgentKind::kMppi) {
        WriteMetricsCsv((fs::path(out_dir) / "metrics.csv").string(),
                        outcome.eval_rows);
      }
      log.Line("evaluated episodes=" + std::to_string(report.episodes) +
               " mean_cost=" + FormatDouble(report.mean_cost) +
               " success_rate=" + FormatDouble(report.success_rate));
      outcome.report = std::move(report);
    } else if (config.agent == AgentKind::kMppi) {
      WriteMetricsCsv((fs::path(out_dir) / "metrics.csv").string(), {});
    }
  } catch (const NumericalError& e) {
    outcome.exit_code = kExitNumerical;
    outcome.message = std::string("numerical failure, run aborted: ") + e.what();
  } catch (const InvalidArgument& e) {
    outcome.exit_code = kExitConfig;
    outcome.message = e.what();
  }
  log.Line(outcome.exit_code == 0 ? "done" : "failed: " + outcome.message);
  return outcome;
}

// Greedy MPC evaluation of a stored checkpoint under `config`.
inline EvalReport EvaluateCheckpoint(const std::string& checkpoint,
                                     const ExperimentConfig& config,
                                     int episodes, int horizon, uint64_t seed) {
  const std::unique_ptr<Environment> env = MakeEnvironment(config.env);
  MPPIParams mppi = config.mppi;
  if (horizon > 0) mppi.horizon = horizon;
  std::optional<QNetwork> net;
  if (!checkpoint.empty()) net = LoadCheckpoint(checkpoint);
  return Evaluate(*env, net ? &*net : nullptr, mppi, config.eval.planner,
                  episodes, seed, config.learner.episode_steps);
}

// Command-line style overrides applied on top of a parsed JSON config.
struct Overrides {
  std::optional<uint64_t> seed;
  std::optional<int> episodes;
  std::optional<int> horizon;
};

inline Json ApplyOverrides(Json j, const Overrides& o) {
  if (o.seed) {
    j["seed"] = *o.seed;
    if (j.contains("eval") && j["eval"].contains("seed")) j["eval"].erase("seed");
  }
  if (o.horizon) j["mppi"]["horizon"] = *o.horizon;
  if (o.episodes) {
    if (j.value("agent", "") == "mppi") {
      j["eval"]["episodes"] = *o.episodes;
    } else {
      j["learner"]["episodes"] = *o.episodes;
    }
  }
  return j;
}

struct SuiteCell {
  std::string name;
  Json config;  // full config JSON for this cell (before seed injection)
};

struct SuiteOutcome {
  int exit_code = 0;
  int cells_run = 0;
  int cells_failed = 0;
  std::vector<std::string> failures;
};

// Suite file:
//   { "base": {config}, "seeds": [..],
//     "cells": [ {"name": "...", "overrides": {json merge patch}} ] }
// Every cell runs once per seed into <out>/<cell>/seed_<s>/. The combined
// long-format CSV is <out>/combined.csv; per-run reports stay in the run
// directories and <out>/suite_status.json records failures.
inline std::vector<SuiteCell> ParseSuiteCells(const Json& suite) {
  internal::CheckKeys(suite, "suite", {"base", "seeds", "cells", "output"});
  if (!suite.contains("cells") || !suite.at("cells").is_array()) {
    throw ConfigError("suite.cells is required");
  }
  const Json base = suite.value("base", Json::object());
  std::vector<SuiteCell> cells;
  std::set<std::string> names;
  for (const Json& cell : suite.at("cells")) {
    internal::CheckKeys(cell, "suite.cells[]", {"name", "overrides"});
    SuiteCell c;
    c.name = internal::Get<std::string>(cell, "suite.cells[]", "name");
    if (c.name.empty() || c.name.find('/') != std::string::npos ||
        !names.insert(c.name).second) {
      throw ConfigError("suite.cells[].name: invalid or duplicate name '" +
                        c.name + "'");
    }
    c.config = base;
    if (cell.contains("overrides")) c.config.merge_patch(cell.at("overrides"));
    cells.push_back(std::move(c));
  }
  return cells;
}

inline SuiteOutcome RunSuite(const Json& suite, const std::string& out_dir) {
  const std::vector<SuiteCell> cells = ParseSuiteCells(suite);
  std::vector<uint64_t> seeds =
      suite.value("seeds", std::vector<uint64_t>{0});
  fs::create_directories(out_dir);
  SuiteOutcome outcome;
  std::ofstream combined((fs::path(out_dir) / "combined.csv").string(),
                         std::ios::trunc);
  combined << kCombinedHeader << '\n';
  Json status = Json::array();
  for (const SuiteCell& cell : cells) {
    for (uint64_t seed : seeds) {
      const std::string run_dir =
          (fs::path(out_dir) / cell.name / ("seed_" + std::to_string(seed)))
              .string();
      Json cfg = cell.config;
      cfg["seed"] = seed;
      Json entry = {{"cell", cell.name}, {"seed", seed}};
      ++outcome.cells_run;
      try {
        const ExperimentConfig config = ParseConfig(cfg);
        RunOutcome run = RunExperiment(config, run_dir);
        if (run.exit_code != 0) throw std::runtime_error(run.message);
        for (const MetricsRow& r : run.training_rows) {
          combined << cell.name << ",train," << FormatRow(r) << '\n';
        }
        for (const MetricsRow& r : run.eval_rows) {
          combined << cell.name << ",eval," << FormatRow(r) << '\n';
        }
        entry["status"] = "ok";
        if (run.report) {
          entry["mean_cost"] = run.report->mean_cost;
          entry["success_rate"] = run.report->success_rate;
        }
      } catch (const std::exception& e) {
        ++outcome.cells_failed;
        outcome.failures.push_back(cell.name + "/seed_" + std::to_string(seed) +
                                   ": " + e.what());
        entry["status"] = "failed";
        entry["error"] = e.what();
      }
      status.push_back(entry);
    }
  }
  const bool partial = outcome.cells_failed > 0;
  WriteText((fs::path(out_dir) / "suite_status.json").string(),
            Json{{"partial", partial}, {"runs", status}}.dump(2) + "\n");
  outcome.exit_code = partial ? kExitPartial : kExitOk;
  return outcome;
}

}  // namespace mpq

#endif  // MPQ_HARNESS_H_
