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

#include "mpq/pendulum.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

namespace mpq {
namespace {

constexpr double kPi = std::numbers::pi;

StateVector State(double theta, double theta_dot) {
  return (StateVector(2) << theta, theta_dot).finished();
}

const EnvParams kTrue{{1.0, 1.0}};

TEST(PendulumTest, HangingIsAFixedPoint) {
  const Pendulum env;
  StateVector next = env.Step(State(kPi, 0.0), Vector::Zero(1), kTrue);
  EXPECT_NEAR(next[1], 0.0, 1e-12);
  EXPECT_NEAR(std::abs(next[0]), kPi, 1e-12);
}

TEST(PendulumTest, UprightIsAFixedPoint) {
  const Pendulum env;
  StateVector next = env.Step(State(0.0, 0.0), Vector::Zero(1), kTrue);
  EXPECT_EQ(next[0], 0.0);
  EXPECT_EQ(next[1], 0.0);
}

TEST(PendulumTest, HorizontalRodAccelerates) {
  const Pendulum env;
  StateVector next = env.Step(State(kPi / 2, 0.0), Vector::Zero(1), kTrue);
  // 0.05 * (3 * 9.81 / 2) * sin(pi / 2)
  EXPECT_NEAR(next[1], 0.73575, 1e-12);
  // the angle integrates the updated velocity
  EXPECT_NEAR(next[0], kPi / 2 + 0.05 * 0.73575, 1e-12);
}

TEST(PendulumTest, TorqueTermAndClamp) {
  const Pendulum env;
  // u = 2 with m = 2, l = 0.5: 3 / (m l^2) u = 12 rad/s^2
  StateVector next = env.Step(State(0.0, 0.0), Vector::Constant(1, 2.0),
                              EnvParams{{2.0, 0.5}});
  EXPECT_NEAR(next[1], 0.6, 1e-12);
  // commanded torque beyond the bound is clamped
  StateVector clamped = env.Step(State(0.0, 0.0), Vector::Constant(1, 50.0),
                                 EnvParams{{2.0, 0.5}});
  EXPECT_EQ(clamped, next);
  // velocity limit
  StateVector fast = env.Step(State(0.0, 7.99), Vector::Constant(1, 2.0), kTrue);
  EXPECT_EQ(fast[1], 8.0);
}

TEST(PendulumTest, Cost) {
  const Pendulum env;
  EXPECT_EQ(env.Cost(State(0.0, 0.0), Vector::Zero(1)), 0.0);
  EXPECT_NEAR(env.Cost(State(kPi, 1.0), Vector::Zero(1)), kPi * kPi + 0.1, 1e-12);
  EXPECT_NEAR(env.Cost(State(kPi, 1.0), Vector::Zero(1)), 9.9696, 1e-4);
  EXPECT_NEAR(env.Cost(State(-kPi, 0.0), Vector::Zero(1)), kPi * kPi, 1e-12);
  EXPECT_NEAR(env.Cost(State(2 * kPi + 0.1, 0.0), Vector::Zero(1)), 0.01, 1e-12);
}

TEST(PendulumTest, Observe) {
  const Pendulum env;
  Vector o = env.Observe(State(0.0, 0.0));
  EXPECT_EQ(o, (Vector(3) << 1.0, 0.0, 0.0).finished());
  o = env.Observe(State(kPi / 2, 2.0));
  EXPECT_NEAR(o[0], 0.0, 1e-15);
  EXPECT_NEAR(o[1], 1.0, 1e-15);
  EXPECT_EQ(o[2], 2.0);
  for (double theta = -7.0; theta < 7.0; theta += 0.37) {
    o = env.Observe(State(theta, 0.0));
    EXPECT_NEAR(o[0] * o[0] + o[1] * o[1], 1.0, 1e-15);
  }
}

TEST(PendulumTest, WrapAngle) {
  EXPECT_EQ(WrapAngle(kPi), kPi);
  EXPECT_NEAR(WrapAngle(-kPi), kPi, 1e-15);
  EXPECT_NEAR(WrapAngle(3 * kPi / 2), -kPi / 2, 1e-15);
  EXPECT_NEAR(WrapAngle(0.5 + 4 * kPi), 0.5, 1e-12);
}

TEST(PendulumTest, SuccessUsesFinalSecond) {
  const Pendulum env;
  std::vector<StateVector> traj(200, State(0.0, 0.0));
  EXPECT_TRUE(env.Success(traj));
  traj[180] = State(0.25, 0.0);
  EXPECT_FALSE(env.Success(traj));
  traj[180] = State(0.0, 0.0);
  traj[179] = State(3.0, 0.0);  // outside the final 20 steps
  EXPECT_TRUE(env.Success(traj));
  traj.back() = State(-0.2, 0.0);
  EXPECT_FALSE(env.Success(traj));
}

TEST(PendulumTest, CostIsNonNegative) {
  const Pendulum env;
  RngStream rng(10);
  for (int i = 0; i < 1000; ++i) {
    StateVector s = State(rng.Uniform(-10, 10), rng.Uniform(-8, 8));
    EXPECT_GE(env.Cost(s, Vector::Zero(1)), 0.0);
  }
}

struct Drift {
  double gain = 0.0;
  // first-order modified-energy amplitude of semi-implicit Euler:
  // (dt / 2) g max |sin(theta) theta_dot| for unit mass and length
  double bound = 0.0;
};

Drift EnergyDrift(double dt, double seconds) {
  EnvironmentSpec spec = PendulumSpec();
  spec.dt = dt;
  const Pendulum env(spec);
  StateVector s = State(2.0, 0.0);
  const double e0 = PendulumEnergy(s, 1.0, 1.0);
  Drift d;
  double peak = 0.0;
  const int steps = static_cast<int>(std::lround(seconds / dt));
  for (int t = 0; t < steps; ++t) {
    s = env.Step(s, Vector::Zero(1), kTrue);
    d.gain = std::max(d.gain, PendulumEnergy(s, 1.0, 1.0) - e0);
    peak = std::max(peak, std::abs(std::sin(s[0]) * s[1]));
  }
  d.bound = 0.5 * dt * 9.81 * peak;
  return d;
}

// Unforced swing from 2 rad. The energy error stays within the modified
// energy band and does not grow with simulated time.
TEST(PendulumTest, EnergyDriftRegression) {
  for (double dt : {0.001, 0.05}) {
    const Drift ten = EnergyDrift(dt, 10.0);
    const Drift forty = EnergyDrift(dt, 40.0);
    EXPECT_LT(ten.gain, 1.15 * ten.bound) << dt;
    EXPECT_LT(forty.gain, 1.15 * ten.bound) << dt;
  }
  EXPECT_GT(EnergyDrift(0.05, 10.0).gain, EnergyDrift(0.001, 10.0).gain);
}

}  // namespace
}  // namespace mpq
