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

#ifndef MPQ_CATCH_H_
#define MPQ_CATCH_H_

#include <algorithm>
#include <cmath>
#include <span>

#include "mpq/environment.h"

namespace mpq {

// Planar ball-and-cup. An acceleration-controlled cup anchors one end of an
// elastic tendon; a point-mass ball hangs from the other end under gravity.
// The tendon only pulls (spring-damper beyond its rest length). The cup is
// open at the top: a ball that falls to within the cup radius (moving down
// relative to the cup) is caught and moves with the cup from then on.
//
// State (9): cup x z, ball x z, cup vx vz, ball vx vz, caught flag.
// Action (2): commanded cup acceleration (m/s^2).
// Parameters: [ball_mass (kg), stiffness (N/m)].
namespace catch_state {
inline constexpr int kCupX = 0;
inline constexpr int kCupZ = 1;
inline constexpr int kBallX = 2;
inline constexpr int kBallZ = 3;
inline constexpr int kCupVx = 4;
inline constexpr int kCupVz = 5;
inline constexpr int kBallVx = 6;
inline constexpr int kBallVz = 7;
inline constexpr int kCaught = 8;
}  // namespace catch_state

struct CatchConstants {
  double gravity = 9.81;
  double cup_radius = 0.05;
  double rest_length = 0.3;
  double tendon_damping = 0.02;  // N s / m along the tendon
  double cup_damping = 2.0;      // 1 / s
  double workspace = 0.4;        // cup stays in [-w, w]^2
  int substeps = 25;
};

inline bool BallInCup(const StateVector& s, double cup_radius) {
  using namespace catch_state;
  if (s[kCaught] > 0.5) return true;
  const double dx = s[kBallX] - s[kCupX];
  const double dz = s[kBallZ] - s[kCupZ];
  return dx * dx + dz * dz < cup_radius * cup_radius;
}

inline StateVector CatchStep(const StateVector& state, const ActionVector& accel,
                             double ball_mass, double stiffness, double dt,
                             const CatchConstants& c = {}) {
  using namespace catch_state;
  StateVector s = state;
  const double h = dt / c.substeps;
  for (int i = 0; i < c.substeps; ++i) {
    // cup
    s[kCupVx] += (accel[0] - c.cup_damping * s[kCupVx]) * h;
    s[kCupVz] += (accel[1] - c.cup_damping * s[kCupVz]) * h;
    s[kCupX] += s[kCupVx] * h;
    s[kCupZ] += s[kCupVz] * h;
    for (int axis : {kCupX, kCupZ}) {
      const int vel = axis + 4;
      if (s[axis] > c.workspace) {
        s[axis] = c.workspace;
        s[vel] = std::min(s[vel], 0.0);
      } else if (s[axis] < -c.workspace) {
        s[axis] = -c.workspace;
        s[vel] = std::max(s[vel], 0.0);
      }
    }
    if (s[kCaught] > 0.5) {
      s[kBallX] = s[kCupX];
      s[kBallZ] = s[kCupZ];
      s[kBallVx] = s[kCupVx];
      s[kBallVz] = s[kCupVz];
      continue;
    }
    // ball
    const double dx = s[kBallX] - s[kCupX];
    const double dz = s[kBallZ] - s[kCupZ];
    const double length = std::sqrt(dx * dx + dz * dz);
    double fx = 0.0;
    double fz = -ball_mass * c.gravity;
    if (length > c.rest_length) {
      const double nx = dx / length;
      const double nz = dz / length;
      const double rel_speed = (s[kBallVx] - s[kCupVx]) * nx +
                               (s[kBallVz] - s[kCupVz]) * nz;
      const double tension =
          std::max(0.0, stiffness * (length - c.rest_length) +
                            c.tendon_damping * rel_speed);
      fx -= tension * nx;
      fz -= tension * nz;
    }
    s[kBallVx] += fx / ball_mass * h;
    s[kBallVz] += fz / ball_mass * h;
    s[kBallX] += s[kBallVx] * h;
    s[kBallZ] += s[kBallVz] * h;
    // the cup is open at the top: only a ball falling into it is caught
    if (s[kBallVz] < s[kCupVz] && BallInCup(s, c.cup_radius)) s[kCaught] = 1.0;
  }
  return s;
}

inline EnvironmentSpec CatchSpec() {
  EnvironmentSpec spec;
  spec.name = "catch";
  spec.state_dim = 9;
  spec.action_dim = 2;
  spec.observation_dim = 12;
  spec.dt = 0.05;
  spec.episode_steps = 80;
  spec.param_names = {"ball_mass", "stiffness"};
  spec.true_params = {{0.058, 5.0}};
  spec.model_distribution = {{{0.0087, 0.87}, {0.375, 150.0}}};
  spec.action_low = Vector::Constant(2, -8.0);
  spec.action_high = Vector::Constant(2, 8.0);
  // ball position relative to the cup and ball velocity
  spec.reset_low = (Vector(4) << -0.25, -0.1, 0.0, 0.0).finished();
  spec.reset_high = (Vector(4) << 0.25, 0.3, 0.0, 0.0).finished();
  spec.constants = {{"gravity", 9.81},       {"cup_radius", 0.05},
                    {"rest_length", 0.3},    {"tendon_damping", 0.02},
                    {"cup_damping", 2.0},    {"workspace", 0.4},
                    {"substeps", 25.0}};
  return spec;
}

class Catch final : public Environment {
 public:
  explicit Catch(EnvironmentSpec spec = CatchSpec())
      : Environment(std::move(spec)) {
    spec_.Validate();
    if (spec_.state_dim != 9 || spec_.action_dim != 2 ||
        spec_.observation_dim != 12 || spec_.param_names.size() != 2 ||
        spec_.reset_low.size() != 4) {
      throw InvalidArgument("catch: inconsistent spec dimensions");
    }
    constants_.gravity = spec_.constant("gravity");
    constants_.cup_radius = spec_.constant("cup_radius");
    constants_.rest_length = spec_.constant("rest_length");
    constants_.tendon_damping = spec_.constant("tendon_damping");
    constants_.cup_damping = spec_.constant("cup_damping");
    constants_.workspace = spec_.constant("workspace");
    constants_.substeps =
        static_cast<int>(std::lround(spec_.constant("substeps")));
    if (constants_.substeps < 1) {
      throw InvalidArgument("catch: substeps must be >= 1");
    }
  }

  StateVector Step(const StateVector& state, const ActionVector& action,
                   const EnvParams& params) const override {
    CheckFinite(state, action);
    StateVector next = CatchStep(state, ClampAction(action), params[0],
                                 params[1], spec_.dt, constants_);
    if (!next.allFinite()) throw NumericalError("catch: integration diverged");
    return next;
  }

  // 0 while the ball is in the cup, 1 otherwise
  double Cost(const StateVector& state, const ActionVector&) const override {
    return BallInCup(state, constants_.cup_radius) ? 0.0 : 1.0;
  }

  // ball, cup, ball velocity, cup velocity, cup - ball, cos/sin of the angle
  // of the line from ball to cup
  Vector Observe(const StateVector& s) const override {
    using namespace catch_state;
    const double dx = s[kCupX] - s[kBallX];
    const double dz = s[kCupZ] - s[kBallZ];
    const double r = std::sqrt(dx * dx + dz * dz);
    const double cos_a = r > 0.0 ? dx / r : 1.0;
    const double sin_a = r > 0.0 ? dz / r : 0.0;
    Vector o(12);
    o << s[kBallX], s[kBallZ], s[kCupX], s[kCupZ], s[kBallVx], s[kBallVz],
        s[kCupVx], s[kCupVz], dx, dz, cos_a, sin_a;
    return o;
  }

  StateVector Reset(RngStream& rng) const override {
    using namespace catch_state;
    const Vector box = SampleResetBox(spec_, rng);
    StateVector s = StateVector::Zero(9);
    s[kBallX] = box[0];
    s[kBallZ] = box[1];
    s[kBallVx] = box[2];
    s[kBallVz] = box[3];
    if (BallInCup(s, constants_.cup_radius)) s[kCaught] = 1.0;
    return s;
  }

  // ball in the cup at the end of the episode
  bool Success(std::span<const StateVector> trajectory) const override {
    return !trajectory.empty() &&
           BallInCup(trajectory.back(), constants_.cup_radius);
  }

  const CatchConstants& constants() const { return constants_; }

 private:
  CatchConstants constants_;
};

}  // namespace mpq

#endif  // MPQ_CATCH_H_
