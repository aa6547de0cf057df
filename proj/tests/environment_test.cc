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

#include "mpq/environment.h"

#include <cmath>

#include <gtest/gtest.h>

#include "mpq/catch.h"
#include "mpq/pendulum.h"

namespace mpq {
namespace {

TEST(SampleModelParamsTest, DegenerateIntervalIsExact) {
  ParamDistribution d{{{1.0, 1.0}, {0.3, 0.3}}};
  RngStream rng(1);
  for (int i = 0; i < 10; ++i) {
    EnvParams p = SampleModelParams(d, rng);
    EXPECT_EQ(p[0], 1.0);
    EXPECT_EQ(p[1], 0.3);
  }
}

// mean of U(a, b) is (a + b) / 2 with sample-mean sd (b - a) / sqrt(12 n)
TEST(SampleModelParamsTest, MeanAndSupport) {
  ParamDistribution d{{{0.9, 1.5}}};
  RngStream rng(77);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double m = SampleModelParams(d, rng)[0];
    ASSERT_GE(m, 0.9);
    ASSERT_LE(m, 1.5);
    sum += m;
  }
  EXPECT_NEAR(sum / n, 1.2, 3.0 * 0.6 / std::sqrt(12.0 * n));
}

TEST(SampleModelParamsTest, DrawsDifferFromTruth) {
  const EnvironmentSpec spec = PendulumSpec();
  RngStream rng(4);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_NE(SampleModelParams(spec.model_distribution, rng), spec.true_params);
  }
}

TEST(ParamDistributionTest, RejectsInvertedOrNonPositive) {
  EXPECT_THROW((ParamDistribution{{{2.0, 1.0}}}.Validate()), InvalidArgument);
  EXPECT_THROW((ParamDistribution{{{0.0, 1.0}}}.Validate()), InvalidArgument);
}

TEST(EnvironmentSpecTest, ValidateCatchesMismatches) {
  EnvironmentSpec spec = PendulumSpec();
  EXPECT_NO_THROW(spec.Validate());
  spec.action_low = Vector::Constant(2, -1.0);
  EXPECT_THROW(spec.Validate(), InvalidArgument);
  spec = PendulumSpec();
  spec.true_params.values.push_back(1.0);
  EXPECT_THROW(spec.Validate(), InvalidArgument);
  spec = PendulumSpec();
  EXPECT_EQ(spec.param_index("length"), 1);
  EXPECT_THROW(spec.param_index("inertia"), InvalidArgument);
  EXPECT_THROW(spec.constant("nope"), InvalidArgument);
}

TEST(ResetTest, WithinSupportAndDeterministic) {
  const Pendulum pendulum;
  const Catch catcher;
  for (uint64_t seed : {1u, 2u, 3u}) {
    RngStream a(seed);
    RngStream b(seed);
    StateVector s = pendulum.Reset(a);
    EXPECT_EQ(s, pendulum.Reset(b));
    EXPECT_GT(s[0], -M_PI);
    EXPECT_LE(s[0], M_PI);
    EXPECT_GE(s[1], -1.0);
    EXPECT_LE(s[1], 1.0);

    StateVector c = catcher.Reset(a);
    EXPECT_EQ(c, catcher.Reset(b));
    const EnvironmentSpec& spec = catcher.spec();
    const double dx = c[catch_state::kBallX] - c[catch_state::kCupX];
    const double dz = c[catch_state::kBallZ] - c[catch_state::kCupZ];
    EXPECT_GE(dx, spec.reset_low[0]);
    EXPECT_LE(dx, spec.reset_high[0]);
    EXPECT_GE(dz, spec.reset_low[1]);
    EXPECT_LE(dz, spec.reset_high[1]);
  }
}

TEST(ResetTest, DegenerateSupportIsFixed) {
  EnvironmentSpec spec = PendulumSpec();
  spec.reset_low = (Vector(2) << M_PI, 0.0).finished();
  spec.reset_high = spec.reset_low;
  const Pendulum pendulum(spec);
  RngStream rng(8);
  for (int i = 0; i < 5; ++i) {
    StateVector s = pendulum.Reset(rng);
    EXPECT_EQ(s[0], M_PI);
    EXPECT_EQ(s[1], 0.0);
  }
}

TEST(ClampActionTest, ClampsToBounds) {
  const Pendulum pendulum;
  EXPECT_EQ(pendulum.ClampAction(Vector::Constant(1, 5.0))[0], 2.0);
  EXPECT_EQ(pendulum.ClampAction(Vector::Constant(1, -5.0))[0], -2.0);
  EXPECT_EQ(pendulum.ClampAction(Vector::Constant(1, 0.5))[0], 0.5);
}

}  // namespace
}  // namespace mpq
