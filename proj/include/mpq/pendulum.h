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

#ifndef MPQ_PENDULUM_H_
#define MPQ_PENDULUM_H_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>

#include "mpq/environment.h"

namespace mpq {

// wraps an angle to (-pi, pi]
inline double WrapAngle(double angle) {
  constexpr double kPi = std::numbers::pi;
  double wrapped = std::remainder(angle, 2.0 * kPi);
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  if (wrapped > kPi) wrapped -= 2.0 * kPi;
  return wrapped;
}

// Torque-actuated rigid rod about a hinge. State [theta, theta_dot] with
// theta = 0 upright. Parameters [mass (kg), length (m)].
//
//   theta_ddot = 3 g / (2 l) sin(theta) + 3 / (m l^2) u
//
// Velocity is updated first and the new velocity integrates the angle.
struct PendulumConstants {
  double gravity = 9.81;
  double max_speed = 8.0;
};

inline StateVector PendulumStep(const StateVector& state, double torque,
                                double mass, double length, double dt,
                                const PendulumConstants& c = {}) {
  const double theta = state[0];
  const double theta_dot = state[1];
  const double accel = 3.0 * c.gravity / (2.0 * length) * std::sin(theta) +
                       3.0 / (mass * length * length) * torque;
  StateVector next(2);
  next[1] = std::clamp(theta_dot + accel * dt, -c.max_speed, c.max_speed);
  next[0] = WrapAngle(theta + next[1] * dt);
  return next;
}

// rod about its end: I = m l^2 / 3, center of mass at l / 2, zero at the hinge
inline double PendulumEnergy(const StateVector& state, double mass,
                             double length, double gravity = 9.81) {
  const double inertia = mass * length * length / 3.0;
  return 0.5 * inertia * state[1] * state[1] +
         mass * gravity * 0.5 * length * std::cos(state[0]);
}

inline EnvironmentSpec PendulumSpec() {
  constexpr double kPi = std::numbers::pi;
  EnvironmentSpec spec;
  spec.name = "pendulum";
  spec.state_dim = 2;
  spec.action_dim = 1;
  spec.observation_dim = 3;
  spec.dt = 0.05;
  spec.episode_steps = 200;
  spec.param_names = {"mass", "length"};
  spec.true_params = {{1.0, 1.0}};
  spec.model_distribution = {{{0.9, 1.5}, {0.9, 1.5}}};
  spec.action_low = Vector::Constant(1, -2.0);
  spec.action_high = Vector::Constant(1, 2.0);
  spec.reset_low = (Vector(2) << -kPi, -1.0).finished();
  spec.reset_high = (Vector(2) << kPi, 1.0).finished();
  spec.constants = {{"gravity", 9.81},
                    {"max_speed", 8.0},
                    {"success_angle", 0.2},
                    {"success_window", 1.0}};
  return spec;
}

class Pendulum final : public Environment {
 public:
  explicit Pendulum(EnvironmentSpec spec = PendulumSpec())
      : Environment(std::move(spec)) {
    spec_.Validate();
    if (spec_.state_dim != 2 || spec_.action_dim != 1 ||
        spec_.observation_dim != 3 || spec_.param_names.size() != 2 ||
        spec_.reset_low.size() != 2) {
      throw InvalidArgument("pendulum: inconsistent spec dimensions");
    }
    constants_.gravity = spec_.constant("gravity");
    constants_.max_speed = spec_.constant("max_speed");
    success_angle_ = spec_.constant("success_angle");
    success_steps_ = std::max(
        1, static_cast<int>(std::lround(spec_.constant("success_window") /
                                        spec_.dt)));
  }

  StateVector Step(const StateVector& state, const ActionVector& action,
                   const EnvParams& params) const override {
    CheckFinite(state, action);
    const double torque = std::clamp(action[0], spec_.action_low[0],
                                     spec_.action_high[0]);
    return PendulumStep(state, torque, params[0], params[1], spec_.dt,
                        constants_);
  }

  double Cost(const StateVector& state, const ActionVector&) const override {
    const double theta = WrapAngle(state[0]);
    return theta * theta + 0.1 * state[1] * state[1];
  }

  Vector Observe(const StateVector& state) const override {
    return (Vector(3) << std::cos(state[0]), std::sin(state[0]), state[1])
        .finished();
  }

  StateVector Reset(RngStream& rng) const override {
    constexpr double kPi = std::numbers::pi;
    StateVector s(2);
    const double lo = spec_.reset_low[0];
    const double hi = spec_.reset_high[0];
    // the angle interval is half-open at the bottom: (lo, hi]
    s[0] = lo == hi ? lo : hi - (hi - lo) * rng.Uniform01();
    if (lo <= -kPi && hi >= kPi) s[0] = WrapAngle(s[0]);
    const double vlo = spec_.reset_low[1];
    const double vhi = spec_.reset_high[1];
    s[1] = vlo == vhi ? vlo : rng.Uniform(vlo, vhi);
    return s;
  }

  // |theta| < success_angle at every step of the final success_window seconds
  bool Success(std::span<const StateVector> trajectory) const override {
    if (trajectory.empty()) return false;
    const int n = static_cast<int>(trajectory.size());
    for (int i = std::max(0, n - success_steps_); i < n; ++i) {
      if (std::abs(WrapAngle(trajectory[i][0])) >= success_angle_) {
        return false;
      }
    }
    return true;
  }

  const PendulumConstants& constants() const { return constants_; }

 private:
  PendulumConstants constants_;
  double success_angle_ = 0.2;
  int success_steps_ = 20;
};

}  // namespace mpq

#endif  // MPQ_PENDULUM_H_
