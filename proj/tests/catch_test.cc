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

#include "mpq/catch.h"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

namespace mpq {
namespace {

using namespace catch_state;

StateVector Ball(double ball_x, double ball_z) {
  StateVector s = StateVector::Zero(9);
  s[kBallX] = ball_x;
  s[kBallZ] = ball_z;
  return s;
}

TEST(CatchTest, CostIsZeroInCupAndOneOutside) {
  const Catch env;
  EXPECT_EQ(env.Cost(Ball(0.0, 0.0), Vector::Zero(2)), 0.0);
  EXPECT_EQ(env.Cost(Ball(1.0, 0.0), Vector::Zero(2)), 1.0);
  EXPECT_EQ(env.Cost(Ball(0.0, -1.0), Vector::Zero(2)), 1.0);
  StateVector caught = Ball(1.0, 0.0);
  caught[kCaught] = 1.0;
  EXPECT_EQ(env.Cost(caught, Vector::Zero(2)), 0.0);
}

TEST(CatchTest, CostTakesOnlyTwoValues) {
  const Catch env;
  RngStream rng(3);
  for (int i = 0; i < 2000; ++i) {
    StateVector s = Ball(rng.Uniform(-0.2, 0.2), rng.Uniform(-0.2, 0.2));
    const double c = env.Cost(s, Vector::Zero(2));
    EXPECT_TRUE(c == 0.0 || c == 1.0);
  }
}

TEST(CatchTest, FreeParticleAtRestStaysPut) {
  CatchConstants c;
  c.gravity = 0.0;
  c.tendon_damping = 0.0;
  StateVector s = Ball(0.7, -0.6);
  StateVector next = CatchStep(s, Vector::Zero(2), 0.058, 0.0, 0.02, c);
  EXPECT_EQ(next, s);
}

TEST(CatchTest, SlackBallFallsFreely) {
  CatchConstants c;
  c.substeps = 1;
  // ball above the cup, tendon slack, dropped from rest
  StateVector s = Ball(0.0, 0.2);
  StateVector next = CatchStep(s, Vector::Zero(2), 0.058, 5.0, 0.01, c);
  EXPECT_NEAR(next[kBallVz], -9.81 * 0.01, 1e-12);
  EXPECT_NEAR(next[kBallZ], 0.2 - 9.81 * 0.01 * 0.01, 1e-12);
}

TEST(CatchTest, TautTendonPullsTowardCup) {
  CatchConstants c;
  c.gravity = 0.0;
  StateVector s = Ball(0.5, 0.0);
  StateVector next = CatchStep(s, Vector::Zero(2), 0.1, 10.0, 0.01, c);
  EXPECT_LT(next[kBallVx], 0.0);
  EXPECT_NEAR(next[kBallVz], 0.0, 1e-15);
}

TEST(CatchTest, CupRespondsToCommandedAcceleration) {
  const Catch env;
  StateVector s = Ball(0.0, -0.3);
  StateVector next = env.Step(s, (Vector(2) << 1.0, 0.0).finished(),
                              env.spec().true_params);
  EXPECT_GT(next[kCupVx], 0.0);
  EXPECT_GT(next[kCupX], 0.0);
  // commands beyond the bound are clamped
  StateVector a = env.Step(s, (Vector(2) << 100.0, 0.0).finished(),
                           env.spec().true_params);
  StateVector b = env.Step(
      s, (Vector(2) << env.spec().action_high[0], 0.0).finished(),
      env.spec().true_params);
  EXPECT_EQ(a, b);
}

TEST(CatchTest, CupStaysInWorkspace) {
  const Catch env;
  StateVector s = Ball(0.0, -0.3);
  for (int t = 0; t < 200; ++t) {
    s = env.Step(s, env.spec().action_high, env.spec().true_params);
    EXPECT_LE(s[kCupX], env.constants().workspace);
    EXPECT_LE(s[kCupZ], env.constants().workspace);
  }
  EXPECT_EQ(s[kCupX], env.constants().workspace);
}

TEST(CatchTest, CaptureIsSticky) {
  const Catch env;
  // ball dropped straight onto the cup
  StateVector s = Ball(0.0, 0.1);
  bool caught = false;
  for (int t = 0; t < 100 && !caught; ++t) {
    s = env.Step(s, Vector::Zero(2), env.spec().true_params);
    caught = s[kCaught] > 0.5;
  }
  ASSERT_TRUE(caught);
  for (int t = 0; t < 50; ++t) {
    s = env.Step(s, (Vector(2) << 5.0, -3.0).finished(), env.spec().true_params);
    EXPECT_EQ(env.Cost(s, Vector::Zero(2)), 0.0);
    EXPECT_EQ(s[kBallX], s[kCupX]);
    EXPECT_EQ(s[kBallZ], s[kCupZ]);
  }
  std::vector<StateVector> traj{s};
  EXPECT_TRUE(env.Success(traj));
}

// a ball thrown up through the cup passes it and is caught on the way down
TEST(CatchTest, CatchesOnlyFromAbove) {
  const Catch env;
  StateVector s = Ball(0.0, -0.1);
  s[kBallVz] = 2.5;
  bool passed_rising = false;
  bool caught = false;
  for (int t = 0; t < 200 && !caught; ++t) {
    s = CatchStep(s, Vector::Zero(2), 0.058, 5.0, 0.005,
                  {.substeps = 1});
    const bool inside = std::hypot(s[kBallX], s[kBallZ]) < 0.05;
    if (inside && s[kBallVz] > 0.0) {
      passed_rising = true;
      EXPECT_EQ(s[kCaught], 0.0);
    }
    caught = s[kCaught] > 0.5;
  }
  EXPECT_TRUE(passed_rising);
  ASSERT_TRUE(caught);
  EXPECT_LT(s[kBallVz], 0.0);
}

TEST(CatchTest, Observation) {
  const Catch env;
  StateVector s = Ball(0.3, -0.4);
  s[kCupX] = 0.1;
  s[kBallVz] = 2.0;
  Vector o = env.Observe(s);
  ASSERT_EQ(o.size(), 12);
  EXPECT_EQ(o[0], 0.3);
  EXPECT_EQ(o[1], -0.4);
  EXPECT_EQ(o[2], 0.1);
  EXPECT_EQ(o[5], 2.0);
  EXPECT_NEAR(o[8], -0.2, 1e-15);
  EXPECT_NEAR(o[9], 0.4, 1e-15);
  EXPECT_NEAR(o[10] * o[10] + o[11] * o[11], 1.0, 1e-15);
  EXPECT_NEAR(std::atan2(o[11], o[10]), std::atan2(0.4, -0.2), 1e-15);
}

TEST(CatchTest, GeometryComesFromTheSpec) {
  EnvironmentSpec spec = CatchSpec();
  spec.constants["cup_radius"] = 0.2;
  const Catch wide(spec);
  EXPECT_EQ(wide.Cost(Ball(0.15, 0.0), Vector::Zero(2)), 0.0);
  const Catch narrow;
  EXPECT_EQ(narrow.Cost(Ball(0.15, 0.0), Vector::Zero(2)), 1.0);
  spec.constants.erase("rest_length");
  EXPECT_THROW(Catch{spec}, InvalidArgument);
}

TEST(CatchTest, RejectsNonFiniteInput) {
  const Catch env;
  StateVector s = Ball(0.0, 0.0);
  s[kBallX] = NAN;
  EXPECT_THROW(env.Step(s, Vector::Zero(2), env.spec().true_params),
               NumericalError);
}

}  // namespace
}  // namespace mpq
