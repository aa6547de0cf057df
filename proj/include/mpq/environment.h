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

#ifndef MPQ_ENVIRONMENT_H_
#define MPQ_ENVIRONMENT_H_

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mpq/core.h"
#include "mpq/rng.h"

namespace mpq {

// Physical parameters of a dynamics model, in the order given by
// EnvironmentSpec::param_names.
struct EnvParams {
  std::vector<double> values;

  double operator[](size_t i) const { return values[i]; }
  size_t size() const { return values.size(); }

  void Validate() const {
    for (double v : values) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidArgument("EnvParams: parameters must be finite and > 0");
      }
    }
  }

  friend bool operator==(const EnvParams&, const EnvParams&) = default;
};

struct Interval {
  double low = 0.0;
  double high = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Independent uniform distribution per parameter.
struct ParamDistribution {
  std::vector<Interval> intervals;

  void Validate() const {
    for (const Interval& i : intervals) {
      if (!(i.low <= i.high)) {
        throw InvalidArgument("ParamDistribution: low > high");
      }
      if (!(i.low > 0.0)) {
        throw InvalidArgument("ParamDistribution: low must be > 0");
      }
    }
  }
};

inline EnvParams SampleModelParams(const ParamDistribution& dist,
                                   RngStream& rng) {
  EnvParams p;
  p.values.reserve(dist.intervals.size());
  for (const Interval& i : dist.intervals) {
    p.values.push_back(i.low == i.high ? i.low : rng.Uniform(i.low, i.high));
  }
  return p;
}

// Static description of an environment. `constants` carries task-specific
// scalars (gravity, geometry, limits) so that they live in the config file.
struct EnvironmentSpec {
  std::string name;
  int state_dim = 0;
  int action_dim = 0;
  int observation_dim = 0;
  double dt = 0.0;         // seconds
  int episode_steps = 0;   // T
  std::vector<std::string> param_names;
  EnvParams true_params;
  ParamDistribution model_distribution;
  Vector action_low;
  Vector action_high;
  // reset distribution, task-specific meaning (see each environment)
  Vector reset_low;
  Vector reset_high;
  std::map<std::string, double> constants;

  double constant(const std::string& key) const {
    auto it = constants.find(key);
    if (it == constants.end()) {
      throw InvalidArgument("EnvironmentSpec '" + name +
                            "': missing constant '" + key + "'");
    }
    return it->second;
  }

  void Validate() const {
    if (!(dt > 0.0)) throw InvalidArgument("EnvironmentSpec: dt must be > 0");
    if (episode_steps < 1) {
      throw InvalidArgument("EnvironmentSpec: episode_steps must be >= 1");
    }
    if (action_low.size() != action_dim || action_high.size() != action_dim) {
      throw InvalidArgument("EnvironmentSpec: action bound size mismatch");
    }
    if ((action_low.array() > action_high.array()).any()) {
      throw InvalidArgument("EnvironmentSpec: action_low > action_high");
    }
    if (true_params.size() != param_names.size() ||
        model_distribution.intervals.size() != param_names.size()) {
      throw InvalidArgument("EnvironmentSpec: parameter count mismatch");
    }
    if (reset_low.size() != reset_high.size() ||
        (reset_low.array() > reset_high.array()).any()) {
      throw InvalidArgument("EnvironmentSpec: invalid reset support");
    }
    true_params.Validate();
    model_distribution.Validate();
  }

  int param_index(const std::string& param) const {
    for (size_t i = 0; i < param_names.size(); ++i) {
      if (param_names[i] == param) return static_cast<int>(i);
    }
    throw InvalidArgument("EnvironmentSpec '" + name + "': unknown parameter '" +
                          param + "'");
  }
};

// Environment contract shared by the plant and the planner's model. All
// member functions are pure and may be called concurrently.
class Environment {
 public:
  explicit Environment(EnvironmentSpec spec) : spec_(std::move(spec)) {}
  virtual ~Environment() = default;

  const EnvironmentSpec& spec() const { return spec_; }

  // advances one control step of length spec().dt; clamps the action first
  virtual StateVector Step(const StateVector& state, const ActionVector& action,
                           const EnvParams& params) const = 0;
  virtual double Cost(const StateVector& state,
                      const ActionVector& action) const = 0;
  virtual Vector Observe(const StateVector& state) const = 0;
  virtual StateVector Reset(RngStream& rng) const = 0;
  // success over the visited states s_1 ... s_T of one episode
  virtual bool Success(std::span<const StateVector> trajectory) const = 0;

  ActionVector ClampAction(const ActionVector& action) const {
    return action.cwiseMax(spec_.action_low).cwiseMin(spec_.action_high);
  }

 protected:
  void CheckFinite(const StateVector& state, const ActionVector& action) const {
    if (state.size() != spec_.state_dim || action.size() != spec_.action_dim) {
      throw InvalidArgument(spec_.name + ": state/action dimension mismatch");
    }
    if (!state.allFinite() || !action.allFinite()) {
      throw NumericalError(spec_.name + ": non-finite state or action");
    }
  }

  EnvironmentSpec spec_;
};

// Uniform draw on the spec's reset box; degenerate coordinates are exact.
inline Vector SampleResetBox(const EnvironmentSpec& spec, RngStream& rng) {
  Vector s(spec.reset_low.size());
  for (int i = 0; i < s.size(); ++i) {
    double lo = spec.reset_low[i];
    double hi = spec.reset_high[i];
    s[i] = lo == hi ? lo : rng.Uniform(lo, hi);
  }
  return s;
}

}  // namespace mpq

#endif  // MPQ_ENVIRONMENT_H_
