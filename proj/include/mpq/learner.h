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

#ifndef MPQ_LEARNER_H_
#define MPQ_LEARNER_H_

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "mpq/core.h"
#include "mpq/environment.h"
#include "mpq/mppi.h"
#include "mpq/qnetwork.h"
#include "mpq/rng.h"

namespace mpq {

enum class AgentKind { kMppi, kMpq, kSoftQ, kMpqDr };

inline std::string AgentName(AgentKind kind) {
  switch (kind) {
    case AgentKind::kMppi:
      return "mppi";
    case AgentKind::kMpq:
      return "mpq";
    case AgentKind::kSoftQ:
      return "softq";
    case AgentKind::kMpqDr:
      return "mpq_dr";
  }
  return "unknown";
}

inline AgentKind ParseAgentKind(const std::string& name) {
  if (name == "mppi") return AgentKind::kMppi;
  if (name == "mpq") return AgentKind::kMpq;
  if (name == "softq") return AgentKind::kSoftQ;
  if (name == "mpq_dr") return AgentKind::kMpqDr;
  throw InvalidArgument("unknown agent kind '" + name +
                        "' (expected mppi, mpq, softq or mpq_dr)");
}

// One real-system step (s, a, c, s'). `generating_params` are the plant
// parameters that produced next_state.
struct Transition {
  StateVector state;
  Vector obs;
  ActionVector action;
  double cost = 0.0;
  StateVector next_state;
  Vector next_obs;
  bool done = false;
  EnvParams generating_params;
};

// Bounded FIFO; index 0 is the oldest stored transition.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity) : capacity_(capacity) {
    if (capacity_ < 1) throw InvalidArgument("ReplayBuffer: capacity must be >= 1");
    data_.reserve(std::min<size_t>(capacity_, 1 << 16));
  }

  void Add(Transition t) {
    if (data_.size() < capacity_) {
      data_.push_back(std::move(t));
    } else {
      data_[head_] = std::move(t);
      head_ = (head_ + 1) % capacity_;
    }
  }

  size_t size() const { return data_.size(); }
  size_t capacity() const { return capacity_; }
  bool empty() const { return data_.empty(); }

  const Transition& operator[](size_t i) const {
    return data_[(head_ + i) % data_.size()];
  }

  // k distinct uniform indices (Floyd's algorithm), in draw order
  std::vector<size_t> SampleIndices(size_t k, RngStream& rng) const {
    if (k > data_.size()) {
      throw InvalidArgument("ReplayBuffer: requested " + std::to_string(k) +
                            " samples from " + std::to_string(data_.size()));
    }
    std::vector<size_t> out;
    out.reserve(k);
    std::unordered_set<size_t> chosen;
    const size_t n = data_.size();
    for (size_t j = n - k; j < n; ++j) {
      size_t t = rng.Below(j + 1);
      if (chosen.contains(t)) t = j;
      chosen.insert(t);
      out.push_back(t);
    }
    return out;
  }

 private:
  size_t capacity_;
  size_t head_ = 0;
  std::vector<Transition> data_;
};

struct LearnerSchedule {
  int episodes = 1;            // N
  int episode_steps = 0;       // T; 0 uses the environment's episode length
  int update_period = 5;       // N_update
  int batch_size = 64;         // K
  int minibatches = 50;        // M
  int target_iterations = 3;
  int target_samples = 0;      // 0 uses the MPPI sample count
  int buffer_capacity = 100000;
  int validation_episodes = 5;
  bool target_network = false;  // soft Q-learning baseline only
  double learning_rate = 1e-3;
  std::vector<int> hidden = {100, 100};

  void Validate() const {
    if (episodes < 1) throw InvalidArgument("learner: episodes must be >= 1");
    if (episode_steps < 0) {
      throw InvalidArgument("learner: episode_steps must be >= 0");
    }
    if (update_period < 1) {
      throw InvalidArgument("learner: update_period must be >= 1");
    }
    if (batch_size < 1) throw InvalidArgument("learner: batch_size must be >= 1");
    if (minibatches < 0) {
      throw InvalidArgument("learner: minibatches must be >= 0");
    }
    if (target_iterations < 1) {
      throw InvalidArgument("learner: target_iterations must be >= 1");
    }
    if (target_samples < 0) {
      throw InvalidArgument("learner: target_samples must be >= 0");
    }
    if (buffer_capacity < 1) {
      throw InvalidArgument("learner: buffer_capacity must be >= 1");
    }
    if (validation_episodes < 0) {
      throw InvalidArgument("learner: validation_episodes must be >= 0");
    }
    if (!(learning_rate > 0.0)) {
      throw InvalidArgument("learner: learning_rate must be > 0");
    }
  }
};

// How the executing plant is parameterized.
enum class PlantMode {
  kTrue,               // the environment's true parameters
  kPerStepRandomized,  // fresh draw from the model distribution every step
};

// Which parameters the planner's model uses.
enum class PlannerModel {
  kTrue,    // true parameters
  kBiased,  // one draw per episode from the model distribution
};

struct EpisodeOptions {
  PlantMode plant = PlantMode::kTrue;
  PlannerModel planner = PlannerModel::kBiased;
  int steps = 0;  // 0 uses the environment's episode length
};

struct EpisodeRecord {
  double total_cost = 0.0;
  bool success = false;
  double mean_free_energy = 0.0;
  int steps = 0;
};

// Runs one receding-horizon episode against the plant. Every executed step
// is appended to `buffer` when it is non-null.
//
// Streams: "reset" for the initial state, "model" for the planner draw,
// "plant" substream t for randomized plant parameters, "mpc" substream t
// for the optimizer at step t.
inline EpisodeRecord CollectEpisode(const Environment& env, const TerminalQ& q,
                                    const MPPIParams& params,
                                    const EpisodeOptions& options,
                                    const RngStream& rng,
                                    ReplayBuffer* buffer) {
  const EnvironmentSpec& spec = env.spec();
  const int steps = options.steps > 0 ? options.steps : spec.episode_steps;

  RngStream reset_rng = rng.Substream("reset");
  StateVector state = env.Reset(reset_rng);

  PlanningModel model{&env, spec.true_params, {}, q};
  if (options.planner == PlannerModel::kBiased) {
    RngStream model_rng = rng.Substream("model");
    model.params = SampleModelParams(spec.model_distribution, model_rng);
  }

  const RngStream plant_rng = rng.Substream("plant");
  const RngStream mpc_rng = rng.Substream("mpc");
  GaussianControlPolicy policy = GaussianControlPolicy::Zero(
      params.horizon, params.Variance(spec.action_dim));

  EpisodeRecord record;
  std::vector<StateVector> trajectory;
  trajectory.reserve(steps);
  double free_energy_sum = 0.0;
  for (int t = 0; t < steps; ++t) {
    MpcStepResult step = MpcStep(state, policy, params, model,
                                 mpc_rng.Substream(static_cast<uint64_t>(t)));
    EnvParams plant_params = spec.true_params;
    if (options.plant == PlantMode::kPerStepRandomized) {
      RngStream r = plant_rng.Substream(static_cast<uint64_t>(t));
      plant_params = SampleModelParams(spec.model_distribution, r);
    }
    const double cost = env.Cost(state, step.action);
    StateVector next = env.Step(state, step.action, plant_params);
    if (buffer != nullptr) {
      Transition tr;
      tr.state = state;
      tr.obs = env.Observe(state);
      tr.action = step.action;
      tr.cost = cost;
      tr.next_state = next;
      tr.next_obs = env.Observe(next);
      tr.done = false;  // fixed-length episodes end by time limit
      tr.generating_params = std::move(plant_params);
      buffer->Add(std::move(tr));
    }
    record.total_cost += cost;
    free_energy_sum += step.free_energy.value;
    trajectory.push_back(next);
    state = std::move(next);
    policy = std::move(step.next_policy);
  }
  record.steps = steps;
  record.mean_free_energy = free_energy_sum / steps;
  record.success = env.Success(trajectory);
  return record;
}

struct TargetResult {
  double value = 0.0;        // y
  double free_energy = 0.0;  // H-step free energy at s'
};

// Free-energy Bellman target y = c + gamma F(s'). F is estimated from a
// fresh batch drawn from the policy obtained by `target.iterations` MPPI
// iterations from s' (streams "optimize" and "estimate").
inline TargetResult MakeTarget(const Transition& transition,
                               const PlanningModel& model,
                               const MPPIParams& target,
                               const RngStream& rng) {
  TargetResult out;
  if (transition.done) {
    out.value = transition.cost;
    return out;
  }
  if (!transition.next_state.allFinite()) {
    throw NumericalError("MakeTarget: non-finite next state");
  }
  const int adim = model.env->spec().action_dim;
  GaussianControlPolicy init =
      GaussianControlPolicy::Zero(target.horizon, target.Variance(adim));
  OptimizeResult opt = Optimize(transition.next_state, init, target, model,
                                rng.Substream("optimize"));
  RngStream estimate_rng = rng.Substream("estimate");
  RolloutBatch fresh =
      Rollout(model, transition.next_state, opt.policy,
              SampleGaussianNoise(opt.policy, target.samples, estimate_rng),
              target.temperature, target.discount);
  out.free_energy = FreeEnergy(fresh, target.temperature).value;
  out.value = transition.cost + target.discount * out.free_energy;
  if (!std::isfinite(out.value)) {
    throw NumericalError("MakeTarget: non-finite target");
  }
  return out;
}

// MPPI parameters used for target generation
inline MPPIParams TargetParams(const MPPIParams& online,
                               const LearnerSchedule& schedule) {
  MPPIParams p = online;
  p.iterations = schedule.target_iterations;
  if (schedule.target_samples > 0) p.samples = schedule.target_samples;
  return p;
}

struct UpdateStats {
  int minibatches = 0;
  double mean_td_error = 0.0;  // mean |y - Q(s, a)| before each step
  double mean_loss = 0.0;      // mean minibatch loss before each step
};

// Called before each minibatch with the network that produces its targets.
using TargetHook = std::function<void(int minibatch, const QNetwork& target_net)>;

// M rounds of: uniform minibatch -> targets from the current network (or
// `frozen` when given) -> MSE gradient -> Adam step. Minibatch m draws from
// rng.Substream(m).
inline UpdateStats UpdateQ(const ReplayBuffer& buffer, QNetwork& net,
                           AdamState& adam, const LearnerSchedule& schedule,
                           const Environment& env, const EnvParams& model_params,
                           const MPPIParams& online, const RngStream& rng,
                           const QNetwork* frozen = nullptr,
                           const TargetHook& hook = {}) {
  UpdateStats stats;
  if (schedule.minibatches == 0) return stats;
  const size_t k = static_cast<size_t>(schedule.batch_size);
  if (buffer.size() < k) {
    throw InvalidArgument("UpdateQ: buffer holds " +
                          std::to_string(buffer.size()) +
                          " transitions, minibatch needs " + std::to_string(k));
  }
  const MPPIParams target = TargetParams(online, schedule);
  const EnvironmentSpec& spec = env.spec();
  for (int m = 0; m < schedule.minibatches; ++m) {
    const QNetwork& target_net = frozen != nullptr ? *frozen : net;
    if (hook) hook(m, target_net);
    const PlanningModel model{&env, model_params, {}, NetworkQ(target_net)};
    RngStream mb_rng = rng.Substream(static_cast<uint64_t>(m));
    const std::vector<size_t> idx = buffer.SampleIndices(k, mb_rng);
    MiniBatch batch;
    batch.observations.resize(spec.observation_dim, k);
    batch.actions.resize(spec.action_dim, k);
    batch.targets.resize(k);
    const RngStream target_rng = mb_rng.Substream("targets");
    for (size_t i = 0; i < k; ++i) {
      const Transition& tr = buffer[idx[i]];
      batch.observations.col(i) = tr.obs;
      batch.actions.col(i) = tr.action;
      batch.targets[i] =
          MakeTarget(tr, model, target, target_rng.Substream(uint64_t(i)))
              .value;
    }
    const Vector q = net.Forward(batch.Inputs());
    stats.mean_td_error += (batch.targets - q).cwiseAbs().mean();
    stats.mean_loss += (batch.targets - q).squaredNorm() / double(k);
    AdamStep(net, LossGradient(net, batch), adam);
    ++stats.minibatches;
  }
  stats.mean_td_error /= stats.minibatches;
  stats.mean_loss /= stats.minibatches;
  return stats;
}

struct EpisodeMetrics {
  int episode = 0;  // 1-based
  double total_cost = 0.0;
  bool success = false;
  double mean_free_energy = 0.0;
  double mean_td_error = 0.0;      // from the most recent update; 0 before any
  double interaction_seconds = 0.0;  // cumulative plant time
};

struct TrainerConfig {
  const Environment* env = nullptr;
  AgentKind agent = AgentKind::kMpq;
  MPPIParams mppi;
  LearnerSchedule schedule;
  uint64_t seed = 0;
};

struct TrainResult {
  QNetwork final_net;
  QNetwork best_net;
  double best_validation_cost = std::numeric_limits<double>::infinity();
  std::vector<EpisodeMetrics> metrics;
  int updates = 0;
  int target_refreshes = 0;
  MPPIParams mppi;  // effective online parameters
};

struct TrainHooks {
  TargetHook on_target;
  std::function<void(int update, const QNetwork& net)> after_update;
  // every collected transition, for provenance checks
  std::function<void(const Transition&)> on_transition;
};

// Shared training loop for MPQ, its domain-randomized variant and the
// soft Q-learning baseline.
//
// Streams per episode i: "episode" substream i (collection), "update"
// substream i (targets and minibatches), "validation" substream i.
inline TrainResult Train(const TrainerConfig& config,
                         const TrainHooks& hooks = {}) {
  if (config.env == nullptr) throw InvalidArgument("Train: environment is null");
  if (config.agent == AgentKind::kMppi) {
    throw InvalidArgument("Train: the mppi agent has nothing to train");
  }
  const Environment& env = *config.env;
  const EnvironmentSpec& spec = env.spec();
  LearnerSchedule schedule = config.schedule;
  schedule.Validate();
  MPPIParams mppi = config.mppi;
  if (config.agent == AgentKind::kSoftQ) mppi.horizon = 1;
  mppi.Validate();

  const RngStream root(config.seed);
  RngStream init_rng = root.Substream("init");
  TrainResult result;
  result.mppi = mppi;
  QNetwork net = QNetwork::ForTask(spec.observation_dim, spec.action_dim,
                                   schedule.hidden, init_rng);
  AdamState adam = AdamState::For(net, schedule.learning_rate);
  ReplayBuffer buffer(static_cast<size_t>(schedule.buffer_capacity));
  std::optional<QNetwork> frozen;
  const bool use_frozen =
      config.agent == AgentKind::kSoftQ && schedule.target_network;
  if (use_frozen) frozen = net;
  result.best_net = net;

  EpisodeOptions collect;
  collect.plant = config.agent == AgentKind::kMpqDr
                      ? PlantMode::kPerStepRandomized
                      : PlantMode::kTrue;
  collect.planner = PlannerModel::kBiased;
  collect.steps = schedule.episode_steps;
  const int steps =
      schedule.episode_steps > 0 ? schedule.episode_steps : spec.episode_steps;

  const RngStream episode_root = root.Substream("episode");
  const RngStream update_root = root.Substream("update");
  const RngStream validation_root = root.Substream("validation");
  double last_td = 0.0;

  for (int i = 1; i <= schedule.episodes; ++i) {
    EpisodeRecord rec =
        CollectEpisode(env, NetworkQ(net), mppi, collect,
                       episode_root.Substream(uint64_t(i)), &buffer);
    if (hooks.on_transition) {
      const size_t added = std::min<size_t>(steps, buffer.size());
      for (size_t j = buffer.size() - added; j < buffer.size(); ++j) {
        hooks.on_transition(buffer[j]);
      }
    }

    if (i % schedule.update_period == 0 &&
        buffer.size() >= static_cast<size_t>(schedule.batch_size) &&
        schedule.minibatches > 0) {
      const RngStream urng = update_root.Substream(uint64_t(i));
      RngStream model_rng = urng.Substream("model");
      const EnvParams model_params =
          SampleModelParams(spec.model_distribution, model_rng);
      UpdateStats stats =
          UpdateQ(buffer, net, adam, schedule, env, model_params, mppi,
                  urng.Substream("minibatches"),
                  use_frozen ? &*frozen : nullptr, hooks.on_target);
      last_td = stats.mean_td_error;
      ++result.updates;
      if (hooks.after_update) hooks.after_update(result.updates, net);
      if (use_frozen) {
        frozen = net;
        ++result.target_refreshes;
      }
      if (schedule.validation_episodes > 0) {
        const RngStream vrng = validation_root.Substream(uint64_t(i));
        double cost = 0.0;
        for (int v = 0; v < schedule.validation_episodes; ++v) {
          cost += CollectEpisode(env, NetworkQ(net), mppi, collect,
                                 vrng.Substream(uint64_t(v)), nullptr)
                      .total_cost;
        }
        cost /= schedule.validation_episodes;
        if (cost < result.best_validation_cost) {
          result.best_validation_cost = cost;
          result.best_net = net;
        }
      }
    }

    EpisodeMetrics row;
    row.episode = i;
    row.total_cost = rec.total_cost;
    row.success = rec.success;
    row.mean_free_energy = rec.mean_free_energy;
    row.mean_td_error = last_td;
    row.interaction_seconds = i * steps * spec.dt;
    result.metrics.push_back(row);
  }
  if (schedule.validation_episodes == 0) result.best_net = net;
  result.final_net = std::move(net);
  return result;
}

inline TrainResult MpqTrain(TrainerConfig config, const TrainHooks& hooks = {}) {
  config.agent = AgentKind::kMpq;
  return Train(config, hooks);
}

// plant parameters redrawn every timestep; no true-parameter data is used
inline TrainResult TrainDomainRandomized(TrainerConfig config,
                                         const TrainHooks& hooks = {}) {
  config.agent = AgentKind::kMpqDr;
  return Train(config, hooks);
}

// MPQ at H = 1, optionally with a frozen target network
inline TrainResult TrainSoftQBaseline(TrainerConfig config,
                                      const TrainHooks& hooks = {}) {
  config.agent = AgentKind::kSoftQ;
  return Train(config, hooks);
}

struct EvalEpisode {
  int episode = 0;
  double total_cost = 0.0;
  bool success = false;
  double mean_free_energy = 0.0;
};

struct EvalReport {
  int episodes = 0;
  double mean_cost = 0.0;
  double stddev_cost = 0.0;
  double success_rate = 0.0;
  std::vector<EvalEpisode> rows;
};

// Greedy MPC against the true plant. Episode e uses "eval" substream e of
// the seed, so different agents evaluated with one seed see the same start
// states.
inline EvalReport Evaluate(const Environment& env, const QNetwork* net,
                           const MPPIParams& mppi, PlannerModel planner,
                           int episodes, uint64_t seed, int steps = 0) {
  if (episodes < 1) throw InvalidArgument("Evaluate: episodes must be >= 1");
  if (net != nullptr &&
      net->input_dim() != env.spec().observation_dim + env.spec().action_dim) {
    throw InvalidArgument("Evaluate: checkpoint input dimension " +
                          std::to_string(net->input_dim()) +
                          " does not match environment '" + env.spec().name +
                          "'");
  }
  mppi.Validate();
  EpisodeOptions options;
  options.plant = PlantMode::kTrue;
  options.planner = planner;
  options.steps = steps;
  const TerminalQ q = net != nullptr ? NetworkQ(*net) : TerminalQ{};
  const RngStream root = RngStream(seed).Substream("eval");
  EvalReport report;
  report.episodes = episodes;
  double sum = 0.0;
  double sum_sq = 0.0;
  int successes = 0;
  for (int e = 0; e < episodes; ++e) {
    EpisodeRecord rec = CollectEpisode(env, q, mppi, options,
                                       root.Substream(uint64_t(e)), nullptr);
    report.rows.push_back({e + 1, rec.total_cost, rec.success,
                           rec.mean_free_energy});
    sum += rec.total_cost;
    sum_sq += rec.total_cost * rec.total_cost;
    successes += rec.success ? 1 : 0;
  }
  report.mean_cost = sum / episodes;
  report.stddev_cost =
      std::sqrt(std::max(0.0, sum_sq / episodes - report.mean_cost * report.mean_cost));
  report.success_rate = double(successes) / episodes;
  return report;
}

}  // namespace mpq

#endif  // MPQ_LEARNER_H_
