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

#ifndef MPQ_CONFIG_H_
#define MPQ_CONFIG_H_

#include <cstdint>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpq/catch.h"
#include "mpq/core.h"
#include "mpq/environment.h"
#include "mpq/learner.h"
#include "mpq/pendulum.h"

namespace mpq {

using Json = nlohmann::json;

// Invalid experiment configuration. The message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalSettings {
  int episodes = 20;
  PlannerModel planner = PlannerModel::kBiased;
  std::string checkpoint = "final";  // "final" or "best"
  uint64_t seed = 0;                 // evaluation start-state seed
};

// Fully resolved description of one run.
struct ExperimentConfig {
  EnvironmentSpec env;
  AgentKind agent = AgentKind::kMpq;
  MPPIParams mppi;
  LearnerSchedule learner;
  EvalSettings eval;
  uint64_t seed = 0;
};

inline EnvironmentSpec DefaultSpec(const std::string& name) {
  if (name == "pendulum") return PendulumSpec();
  if (name == "catch") return CatchSpec();
  throw ConfigError("env.name: unknown environment '" + name +
                    "' (expected pendulum or catch)");
}

inline std::unique_ptr<Environment> MakeEnvironment(const EnvironmentSpec& spec) {
  if (spec.name == "pendulum") return std::make_unique<Pendulum>(spec);
  if (spec.name == "catch") return std::make_unique<Catch>(spec);
  throw ConfigError("env.name: unknown environment '" + spec.name + "'");
}

namespace internal {

inline void CheckKeys(const Json& obj, const std::string& section,
                      const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(section + ": expected a table");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError(section + "." + key + ": unknown key");
    }
  }
}

template <typename T>
T Get(const Json& obj, const std::string& section, const std::string& key) {
  if (!obj.contains(key)) {
    throw ConfigError(section + "." + key + " is required");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(section + "." + key + ": wrong type");
  }
}

template <typename T>
T GetOr(const Json& obj, const std::string& section, const std::string& key,
        T fallback) {
  return obj.contains(key) ? Get<T>(obj, section, key) : fallback;
}

inline Vector ToVector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> FromVector(const Vector& v) {
  return {v.data(), v.data() + v.size()};
}

inline Vector ReadVector(const Json& obj, const std::string& section,
                         const std::string& key, int expected) {
  Vector v = ToVector(Get<std::vector<double>>(obj, section, key));
  if (expected >= 0 && v.size() != expected) {
    throw ConfigError(section + "." + key + ": expected " +
                      std::to_string(expected) + " values");
  }
  return v;
}

inline EnvironmentSpec ParseEnv(const Json& j) {
  constexpr const char* kSection = "env";
  CheckKeys(j, kSection,
            {"name", "dt", "episode_steps", "true_params", "distribution",
             "action_low", "action_high", "reset_low", "reset_high",
             "constants"});
  EnvironmentSpec spec = DefaultSpec(Get<std::string>(j, kSection, "name"));
  spec.dt = GetOr<double>(j, kSection, "dt", spec.dt);
  spec.episode_steps = GetOr<int>(j, kSection, "episode_steps", spec.episode_steps);
  if (j.contains("true_params")) {
    const Json& tp = j.at("true_params");
    CheckKeys(tp, "env.true_params",
              std::set<std::string>(spec.param_names.begin(), spec.param_names.end()));
    for (const auto& [key, value] : tp.items()) {
      spec.true_params.values[spec.param_index(key)] =
          Get<double>(tp, "env.true_params", key);
    }
  }
  if (j.contains("distribution")) {
    const Json& d = j.at("distribution");
    CheckKeys(d, "env.distribution",
              std::set<std::string>(spec.param_names.begin(), spec.param_names.end()));
    for (const auto& [key, value] : d.items()) {
      auto range = Get<std::vector<double>>(d, "env.distribution", key);
      if (range.size() != 2) {
        throw ConfigError("env.distribution." + key + ": expected [low, high]");
      }
      spec.model_distribution.intervals[spec.param_index(key)] = {range[0],
                                                                  range[1]};
    }
  }
  if (j.contains("action_low")) {
    spec.action_low = ReadVector(j, kSection, "action_low", spec.action_dim);
  }
  if (j.contains("action_high")) {
    spec.action_high = ReadVector(j, kSection, "action_high", spec.action_dim);
  }
  if (j.contains("reset_low")) {
    spec.reset_low = ReadVector(j, kSection, "reset_low",
                                static_cast<int>(spec.reset_low.size()));
  }
  if (j.contains("reset_high")) {
    spec.reset_high = ReadVector(j, kSection, "reset_high",
                                 static_cast<int>(spec.reset_high.size()));
  }
  if (j.contains("constants")) {
    const Json& c = j.at("constants");
    std::set<std::string> known;
    for (const auto& [k, v] : spec.constants) known.insert(k);
    CheckKeys(c, "env.constants", known);
    for (const auto& [key, value] : c.items()) {
      spec.constants[key] = Get<double>(c, "env.constants", key);
    }
  }
  try {
    spec.Validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("env: ") + e.what());
  }
  return spec;
}

inline Json EnvToJson(const EnvironmentSpec& spec) {
  Json j;
  j["name"] = spec.name;
  j["dt"] = spec.dt;
  j["episode_steps"] = spec.episode_steps;
  Json tp = Json::object();
  Json dist = Json::object();
  for (size_t i = 0; i < spec.param_names.size(); ++i) {
    tp[spec.param_names[i]] = spec.true_params.values[i];
    const Interval& iv = spec.model_distribution.intervals[i];
    dist[spec.param_names[i]] = {iv.low, iv.high};
  }
  j["true_params"] = tp;
  j["distribution"] = dist;
  j["action_low"] = FromVector(spec.action_low);
  j["action_high"] = FromVector(spec.action_high);
  j["reset_low"] = FromVector(spec.reset_low);
  j["reset_high"] = FromVector(spec.reset_high);
  Json c = Json::object();
  for (const auto& [k, v] : spec.constants) c[k] = v;
  j["constants"] = c;
  return j;
}

inline MPPIParams ParseMppi(const Json& j, int action_dim) {
  constexpr const char* kSection = "mppi";
  CheckKeys(j, kSection,
            {"horizon", "samples", "sigma", "lambda", "alpha", "gamma",
             "iterations"});
  MPPIParams p;
  p.horizon = Get<int>(j, kSection, "horizon");
  p.samples = Get<int>(j, kSection, "samples");
  p.temperature = Get<double>(j, kSection, "lambda");
  p.step_size = Get<double>(j, kSection, "alpha");
  p.discount = Get<double>(j, kSection, "gamma");
  p.iterations = GetOr<int>(j, kSection, "iterations", 1);
  if (!j.contains("sigma")) throw ConfigError("mppi.sigma is required");
  if (j.at("sigma").is_number()) {
    p.covariance = Vector::Constant(action_dim, j.at("sigma").get<double>());
  } else {
    p.covariance = ReadVector(j, kSection, "sigma", action_dim);
  }
  try {
    p.Validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

inline Json MppiToJson(const MPPIParams& p) {
  return {{"horizon", p.horizon},   {"samples", p.samples},
          {"sigma", FromVector(p.covariance)},
          {"lambda", p.temperature}, {"alpha", p.step_size},
          {"gamma", p.discount},     {"iterations", p.iterations}};
}

inline LearnerSchedule ParseLearner(const Json& j, bool required) {
  constexpr const char* kSection = "learner";
  LearnerSchedule s;
  if (j.is_null()) {
    if (required) throw ConfigError("learner is required for this agent");
    return s;
  }
  CheckKeys(j, kSection,
            {"episodes", "episode_steps", "update_period", "batch_size",
             "minibatches", "target_iterations", "target_samples",
             "buffer_capacity", "validation_episodes", "target_network",
             "learning_rate", "hidden"});
  s.episodes = required ? Get<int>(j, kSection, "episodes")
                        : GetOr<int>(j, kSection, "episodes", s.episodes);
  s.episode_steps = GetOr<int>(j, kSection, "episode_steps", s.episode_steps);
  s.update_period = GetOr<int>(j, kSection, "update_period", s.update_period);
  s.batch_size = GetOr<int>(j, kSection, "batch_size", s.batch_size);
  s.minibatches = GetOr<int>(j, kSection, "minibatches", s.minibatches);
  s.target_iterations =
      GetOr<int>(j, kSection, "target_iterations", s.target_iterations);
  s.target_samples = GetOr<int>(j, kSection, "target_samples", s.target_samples);
  s.buffer_capacity =
      GetOr<int>(j, kSection, "buffer_capacity", s.buffer_capacity);
  s.validation_episodes =
      GetOr<int>(j, kSection, "validation_episodes", s.validation_episodes);
  s.target_network = GetOr<bool>(j, kSection, "target_network", s.target_network);
  s.learning_rate = GetOr<double>(j, kSection, "learning_rate", s.learning_rate);
  s.hidden = GetOr<std::vector<int>>(j, kSection, "hidden", s.hidden);
  try {
    s.Validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

inline Json LearnerToJson(const LearnerSchedule& s) {
  return {{"episodes", s.episodes},
          {"episode_steps", s.episode_steps},
          {"update_period", s.update_period},
          {"batch_size", s.batch_size},
          {"minibatches", s.minibatches},
          {"target_iterations", s.target_iterations},
          {"target_samples", s.target_samples},
          {"buffer_capacity", s.buffer_capacity},
          {"validation_episodes", s.validation_episodes},
          {"target_network", s.target_network},
          {"learning_rate", s.learning_rate},
          {"hidden", s.hidden}};
}

inline EvalSettings ParseEval(const Json& j, bool episodes_required,
                              uint64_t seed) {
  constexpr const char* kSection = "eval";
  EvalSettings e;
  e.seed = seed + 1000003;
  if (j.is_null()) {
    if (episodes_required) throw ConfigError("eval.episodes is required");
    return e;
  }
  CheckKeys(j, kSection, {"episodes", "planner_model", "checkpoint", "seed"});
  e.episodes = episodes_required ? Get<int>(j, kSection, "episodes")
                                 : GetOr<int>(j, kSection, "episodes", e.episodes);
  if (e.episodes < 0) throw ConfigError("eval.episodes must be >= 0");
  const std::string planner =
      GetOr<std::string>(j, kSection, "planner_model", "biased");
  if (planner == "biased") {
    e.planner = PlannerModel::kBiased;
  } else if (planner == "true") {
    e.planner = PlannerModel::kTrue;
  } else {
    throw ConfigError("eval.planner_model: expected 'biased' or 'true'");
  }
  e.checkpoint = GetOr<std::string>(j, kSection, "checkpoint", e.checkpoint);
  if (e.checkpoint != "final" && e.checkpoint != "best") {
    throw ConfigError("eval.checkpoint: expected 'final' or 'best'");
  }
  e.seed = GetOr<uint64_t>(j, kSection, "seed", e.seed);
  return e;
}

inline Json EvalToJson(const EvalSettings& e) {
  return {{"episodes", e.episodes},
          {"planner_model", e.planner == PlannerModel::kTrue ? "true" : "biased"},
          {"checkpoint", e.checkpoint},
          {"seed", e.seed}};
}

}  // namespace internal

// Builds and validates a config from its JSON form. An `output` key is
// accepted and ignored (the output directory is not part of a run's
// identity).
inline ExperimentConfig ParseConfig(const Json& j) {
  internal::CheckKeys(j, "config",
                      {"env", "agent", "mppi", "learner", "eval", "seed",
                       "output"});
  ExperimentConfig c;
  if (!j.contains("env")) throw ConfigError("env is required");
  c.env = internal::ParseEnv(j.at("env"));
  c.agent = [&] {
    try {
      return ParseAgentKind(internal::Get<std::string>(j, "config", "agent"));
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("agent: ") + e.what());
    }
  }();
  if (!j.contains("mppi")) throw ConfigError("mppi is required");
  c.mppi = internal::ParseMppi(j.at("mppi"), c.env.action_dim);
  c.seed = internal::Get<uint64_t>(j, "config", "seed");
  const bool learns = c.agent != AgentKind::kMppi;
  c.learner = internal::ParseLearner(j.value("learner", Json()), learns);
  if (c.agent == AgentKind::kSoftQ) c.mppi.horizon = 1;
  c.eval = internal::ParseEval(j.value("eval", Json()), !learns, c.seed);
  return c;
}

// Resolved form, including every defaulted value.
inline Json ConfigToJson(const ExperimentConfig& c) {
  Json j;
  j["env"] = internal::EnvToJson(c.env);
  j["agent"] = AgentName(c.agent);
  j["mppi"] = internal::MppiToJson(c.mppi);
  if (c.agent != AgentKind::kMppi) j["learner"] = internal::LearnerToJson(c.learner);
  j["eval"] = internal::EvalToJson(c.eval);
  j["seed"] = c.seed;
  return j;
}

// Reads JSON with // and /* */ comments allowed.
inline Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return Json::parse(buffer.str(), nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline ExperimentConfig LoadConfig(const std::string& path) {
  return ParseConfig(ReadJsonFile(path));
}

inline TrainerConfig ToTrainerConfig(const ExperimentConfig& c,
                                     const Environment& env) {
  TrainerConfig t;
  t.env = &env;
  t.agent = c.agent;
  t.mppi = c.mppi;
  t.schedule = c.learner;
  t.seed = c.seed;
  return t;
}

}  // namespace mpq

#endif  // MPQ_CONFIG_H_
