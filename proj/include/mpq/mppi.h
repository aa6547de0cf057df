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

#ifndef MPQ_MPPI_H_
#define MPQ_MPPI_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "mpq/core.h"
#include "mpq/environment.h"
#include "mpq/rng.h"

namespace mpq {

using CostFn =
    std::function<double(const StateVector& state, const ActionVector& action)>;

// Batched terminal value. Column n of `observations` / `actions` belongs to
// sample n; returns one value per column.
using TerminalQ =
    std::function<Vector(const Matrix& observations, const Matrix& actions)>;

inline TerminalQ ConstantQ(double value) {
  return [value](const Matrix& observations, const Matrix&) {
    return Vector::Constant(observations.cols(), value);
  };
}

// What the planner simulates: dynamics, their parameters, the running cost
// and the terminal Q. An empty cost falls back to the environment's cost and
// an empty terminal means Q = 0.
struct PlanningModel {
  const Environment* env = nullptr;
  EnvParams params;
  CostFn cost;
  TerminalQ terminal;

  double RunningCost(const StateVector& s, const ActionVector& a) const {
    return cost ? cost(s, a) : env->Cost(s, a);
  }
};

// N sampled noise sequences and the terms of their importance weights:
//   total_n = sum_{t<H-1} gamma^t c(s_t, a_t)
//           + lambda sum_{t<H} 1/2 u_t' Sigma^-1 (u_t + 2 eps_t)
//           + gamma^{H-1} Q(o(s_{H-1}), a_{H-1})
struct RolloutBatch {
  NoiseBatch noise;
  Vector state_cost;
  Vector control_penalty;
  Vector terminal_q;
  Vector total;

  int size() const { return static_cast<int>(total.size()); }
};

struct WeightVector {
  Vector w;
};

struct FreeEnergyEstimate {
  double value = 0.0;
  double effective_sample_size = 0.0;
};

// lambda sum_t 1/2 u_t' Sigma^-1 (u_t + 2 eps_t) for one noise sequence
inline double ControlPenalty(const GaussianControlPolicy& policy,
                             const Matrix& noise, double temperature) {
  const Matrix& u = policy.means();
  const Vector inv = policy.inverse_variance();
  double penalty = 0.0;
  for (int t = 0; t < u.rows(); ++t) {
    for (int j = 0; j < u.cols(); ++j) {
      penalty += 0.5 * u(t, j) * inv[j] * (u(t, j) + 2.0 * noise(t, j));
    }
  }
  return temperature * penalty;
}

// Expected per-step KL penalty lambda sum_t gamma^t 1/2 u_t' Sigma^-1 u_t;
// pass discount = 1 for the undiscounted prior ratio used by the optimizer.
inline double ExpectedControlPenalty(const GaussianControlPolicy& policy,
                                     double temperature, double discount) {
  const Matrix& u = policy.means();
  const Vector inv = policy.inverse_variance();
  double penalty = 0.0;
  double weight = 1.0;
  for (int t = 0; t < u.rows(); ++t) {
    double step = 0.0;
    for (int j = 0; j < u.cols(); ++j) step += 0.5 * u(t, j) * inv[j] * u(t, j);
    penalty += weight * step;
    weight *= discount;
  }
  return temperature * penalty;
}

// Simulates every noise sequence under the planning model from `start`.
// Actions u_t + eps_t are clamped to the model's bounds before they are
// applied and before they reach Q.
inline RolloutBatch Rollout(const PlanningModel& model, const StateVector& start,
                            const GaussianControlPolicy& policy,
                            NoiseBatch noise, double temperature,
                            double discount) {
  const Environment& env = *model.env;
  const int n = static_cast<int>(noise.size());
  const int horizon = policy.horizon();
  const int adim = policy.action_dim();
  if (n < 1) throw InvalidArgument("Rollout: empty noise batch");
  if (adim != env.spec().action_dim) {
    throw InvalidArgument("Rollout: policy action dimension mismatch");
  }
  if (start.size() != env.spec().state_dim) {
    throw InvalidArgument("Rollout: start state dimension mismatch");
  }

  RolloutBatch batch;
  batch.state_cost = Vector::Zero(n);
  batch.control_penalty = Vector::Zero(n);
  batch.terminal_q = Vector::Zero(n);
  Matrix terminal_obs(env.spec().observation_dim, n);
  Matrix terminal_act(adim, n);

  for (int k = 0; k < n; ++k) {
    const Matrix& eps = noise[k];
    if (eps.rows() != horizon || eps.cols() != adim) {
      throw InvalidArgument("Rollout: noise shape mismatch");
    }
    StateVector s = start;
    double cost = 0.0;
    double weight = 1.0;
    for (int t = 0; t < horizon; ++t) {
      const ActionVector a = env.ClampAction(
          (policy.means().row(t) + eps.row(t)).transpose());
      if (t == horizon - 1) {
        terminal_obs.col(k) = env.Observe(s);
        terminal_act.col(k) = a;
        break;
      }
      cost += weight * model.RunningCost(s, a);
      weight *= discount;
      s = env.Step(s, a, model.params);
      if (!s.allFinite()) throw NumericalError("Rollout: model diverged");
    }
    batch.state_cost[k] = cost;
    batch.control_penalty[k] = ControlPenalty(policy, eps, temperature);
  }

  if (model.terminal) {
    Vector q = model.terminal(terminal_obs, terminal_act);
    if (q.size() != n || !q.allFinite()) {
      throw NumericalError("Rollout: terminal Q returned non-finite values");
    }
    batch.terminal_q = std::pow(discount, horizon - 1) * q;
  }
  batch.total = batch.state_cost + batch.control_penalty + batch.terminal_q;
  batch.noise = std::move(noise);
  return batch;
}

// Normalized importance weights exp(-(total - beta) / lambda) with beta the
// smallest finite total. Non-finite totals receive zero weight.
inline WeightVector ComputeWeights(const RolloutBatch& batch,
                                   double temperature) {
  if (!(temperature > 0.0)) {
    throw InvalidArgument("ComputeWeights: temperature must be > 0");
  }
  const int n = batch.size();
  if (n < 1) throw InvalidArgument("ComputeWeights: empty batch");
  double baseline = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    if (std::isfinite(batch.total[k])) {
      baseline = std::min(baseline, batch.total[k]);
    }
  }
  if (!std::isfinite(baseline)) {
    throw NumericalError("ComputeWeights: all totals are non-finite");
  }
  WeightVector out;
  out.w = Vector::Zero(n);
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    if (std::isfinite(batch.total[k])) {
      out.w[k] = std::exp(-(batch.total[k] - baseline) / temperature);
      sum += out.w[k];
    }
  }
  out.w /= sum;
  return out;
}

// u_t <- u_t + alpha sum_n w_n eps_t^n; covariance untouched
inline GaussianControlPolicy UpdateMean(const GaussianControlPolicy& policy,
                                        const RolloutBatch& batch,
                                        const WeightVector& weights,
                                        double step_size) {
  GaussianControlPolicy next = policy;
  Matrix delta = Matrix::Zero(policy.horizon(), policy.action_dim());
  for (int k = 0; k < batch.size(); ++k) {
    if (weights.w[k] != 0.0) delta += weights.w[k] * batch.noise[k];
  }
  next.means() += step_size * delta;
  return next;
}

// -lambda (logsumexp(-total / lambda) - log n)
inline FreeEnergyEstimate FreeEnergy(const RolloutBatch& batch,
                                     double temperature) {
  const int n = batch.size();
  if (n < 1) throw InvalidArgument("FreeEnergy: empty batch");
  if (!batch.total.allFinite()) {
    throw NumericalError("FreeEnergy: non-finite totals");
  }
  const double baseline = batch.total.minCoeff();
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int k = 0; k < n; ++k) {
    const double e = std::exp(-(batch.total[k] - baseline) / temperature);
    sum += e;
    sum_sq += e * e;
  }
  FreeEnergyEstimate out;
  out.value = baseline - temperature * (std::log(sum) - std::log(double(n)));
  out.effective_sample_size = sum * sum / sum_sq;
  return out;
}

struct OptimizeResult {
  GaussianControlPolicy policy;
  FreeEnergyEstimate free_energy;  // from the final iteration's batch
  std::vector<double> mean_total;  // batch mean of totals, per iteration
};

// `iterations` rounds of sample -> rollout -> weight -> update. Iteration i
// draws its noise from rng.Substream(i).
inline OptimizeResult Optimize(const StateVector& state,
                               const GaussianControlPolicy& init,
                               const MPPIParams& params,
                               const PlanningModel& model,
                               const RngStream& rng) {
  params.Validate();
  if (init.horizon() != params.horizon) {
    throw InvalidArgument("Optimize: policy horizon does not match params");
  }
  OptimizeResult result{init, {}, {}};
  result.mean_total.reserve(params.iterations);
  for (int i = 0; i < params.iterations; ++i) {
    RngStream iteration_rng = rng.Substream(static_cast<uint64_t>(i));
    RolloutBatch batch =
        Rollout(model, state, result.policy,
                SampleGaussianNoise(result.policy, params.samples, iteration_rng),
                params.temperature, params.discount);
    const WeightVector weights = ComputeWeights(batch, params.temperature);
    result.mean_total.push_back(batch.total.mean());
    if (i == params.iterations - 1) {
      result.free_energy = FreeEnergy(batch, params.temperature);
    }
    result.policy = UpdateMean(result.policy, batch, weights, params.step_size);
  }
  return result;
}

// receding-horizon warm start: drop u_0, append the prior mean (zero)
inline GaussianControlPolicy ShiftWarmStart(const GaussianControlPolicy& policy) {
  GaussianControlPolicy next = policy;
  Matrix& u = next.means();
  const int h = policy.horizon();
  if (h > 1) u.topRows(h - 1) = policy.means().bottomRows(h - 1);
  u.row(h - 1).setZero();
  return next;
}

struct MpcStepResult {
  ActionVector action;
  GaussianControlPolicy next_policy;
  FreeEnergyEstimate free_energy;
};

// Optimizes from the carried (already shifted) policy, returns the clamped
// first mean u_0 and the shifted optimized policy for the next call.
inline MpcStepResult MpcStep(const StateVector& state,
                             const GaussianControlPolicy& carried,
                             const MPPIParams& params,
                             const PlanningModel& model, const RngStream& rng) {
  OptimizeResult opt = Optimize(state, carried, params, model, rng);
  MpcStepResult out;
  out.action = model.env->ClampAction(opt.policy.sequence().step(0));
  out.next_policy = ShiftWarmStart(opt.policy);
  out.free_energy = opt.free_energy;
  return out;
}

}  // namespace mpq

#endif  // MPQ_MPPI_H_
