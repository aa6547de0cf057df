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

#ifndef MPQ_CORE_H_
#define MPQ_CORE_H_

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mpq/rng.h"

namespace mpq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// environment state s_t
using StateVector = Vector;
// control input / action
using ActionVector = Vector;

// thrown when a precondition on an argument is violated
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// thrown when a computation produces non-finite values
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool AllFinite(const Eigen::Ref<const Matrix>& m) {
  return m.allFinite();
}

// Open-loop H x action_dim sequence of mean controls. Row t is u_t.
class ControlSequence {
 public:
  ControlSequence() = default;
  ControlSequence(int horizon, int action_dim)
      : means_(Matrix::Zero(horizon, action_dim)) {
    if (horizon < 1 || action_dim < 1) {
      throw InvalidArgument("ControlSequence: horizon and action_dim must be >= 1");
    }
  }
  explicit ControlSequence(Matrix means) : means_(std::move(means)) {
    if (means_.rows() < 1 || means_.cols() < 1) {
      throw InvalidArgument("ControlSequence: empty means");
    }
    if (!means_.allFinite()) {
      throw InvalidArgument("ControlSequence: non-finite means");
    }
  }

  int horizon() const { return static_cast<int>(means_.rows()); }
  int action_dim() const { return static_cast<int>(means_.cols()); }

  const Matrix& means() const { return means_; }
  Matrix& means() { return means_; }

  Vector step(int t) const { return means_.row(t).transpose(); }

 private:
  Matrix means_;
};

// Time-independent Gaussian over H controls: a_t ~ N(u_t, Sigma), with the
// same diagonal Sigma at every step. Only diagonal covariance is supported.
class GaussianControlPolicy {
 public:
  GaussianControlPolicy() = default;
  GaussianControlPolicy(ControlSequence sequence, Vector covariance_diagonal)
      : sequence_(std::move(sequence)),
        variance_(std::move(covariance_diagonal)) {
    Validate();
  }

  // zero-mean policy with the given per-dimension variance
  static GaussianControlPolicy Zero(int horizon, const Vector& variance) {
    return GaussianControlPolicy(
        ControlSequence(horizon, static_cast<int>(variance.size())), variance);
  }

  int horizon() const { return sequence_.horizon(); }
  int action_dim() const { return sequence_.action_dim(); }

  const ControlSequence& sequence() const { return sequence_; }
  ControlSequence& sequence() { return sequence_; }
  const Matrix& means() const { return sequence_.means(); }
  Matrix& means() { return sequence_.means(); }

  // diagonal of Sigma
  const Vector& variance() const { return variance_; }
  Vector inverse_variance() const { return variance_.cwiseInverse(); }
  Vector stddev() const { return variance_.cwiseSqrt(); }

  Matrix covariance() const { return variance_.asDiagonal(); }

 private:
  void Validate() const {
    if (variance_.size() != sequence_.action_dim()) {
      throw InvalidArgument("GaussianControlPolicy: covariance size mismatch");
    }
    for (int i = 0; i < variance_.size(); ++i) {
      if (!(variance_[i] > 0.0) || !std::isfinite(variance_[i])) {
        throw InvalidArgument(
            "GaussianControlPolicy: covariance is not positive definite");
      }
    }
  }

  ControlSequence sequence_;
  Vector variance_;
};

// Builds the diagonal of Sigma from a full matrix, rejecting anything that
// is not diagonal positive definite.
inline Vector DiagonalCovariance(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() < 1) {
    throw InvalidArgument("covariance must be square and non-empty");
  }
  for (int i = 0; i < sigma.rows(); ++i) {
    for (int j = 0; j < sigma.cols(); ++j) {
      if (i != j && sigma(i, j) != 0.0) {
        throw InvalidArgument("only diagonal covariance is supported");
      }
    }
    if (!(sigma(i, i) > 0.0)) {
      throw InvalidArgument("covariance is not positive definite");
    }
  }
  return sigma.diagonal();
}

// Parameters of one MPPI optimization.
struct MPPIParams {
  int horizon = 1;             // H
  int samples = 1;             // N
  double temperature = 1.0;    // lambda
  double step_size = 1.0;      // alpha
  double discount = 1.0;       // gamma
  int iterations = 1;
  Vector covariance;           // diagonal of Sigma, one entry per action dim

  void Validate() const {
    if (horizon < 1) throw InvalidArgument("MPPIParams: horizon must be >= 1");
    if (samples < 1) throw InvalidArgument("MPPIParams: samples must be >= 1");
    if (!(temperature > 0.0)) {
      throw InvalidArgument("MPPIParams: temperature (lambda) must be > 0");
    }
    if (!(step_size > 0.0 && step_size <= 1.0)) {
      throw InvalidArgument("MPPIParams: step_size (alpha) must be in (0, 1]");
    }
    if (!(discount > 0.0 && discount <= 1.0)) {
      throw InvalidArgument("MPPIParams: discount (gamma) must be in (0, 1]");
    }
    if (iterations < 1) {
      throw InvalidArgument("MPPIParams: iterations must be >= 1");
    }
    if (covariance.size() < 1) {
      throw InvalidArgument("MPPIParams: covariance is empty");
    }
    for (int i = 0; i < covariance.size(); ++i) {
      if (!(covariance[i] > 0.0)) {
        throw InvalidArgument("MPPIParams: covariance is not positive definite");
      }
    }
  }

  // covariance broadcast to action_dim entries if given as a scalar
  Vector Variance(int action_dim) const {
    if (covariance.size() == action_dim) return covariance;
    if (covariance.size() == 1) {
      return Vector::Constant(action_dim, covariance[0]);
    }
    throw InvalidArgument("MPPIParams: covariance size does not match actions");
  }
};

// n samples of H x action_dim noise. noise[n](t, j) is eps_t^n component j.
using NoiseBatch = std::vector<Matrix>;

// Draws eps_t^n i.i.d. from N(0, Sigma) for every sample and timestep.
inline NoiseBatch SampleGaussianNoise(const GaussianControlPolicy& policy,
                                      int n, RngStream& rng) {
  if (n < 1) throw InvalidArgument("SampleGaussianNoise: n must be >= 1");
  const Vector stddev = policy.stddev();
  const int horizon = policy.horizon();
  const int dim = policy.action_dim();
  NoiseBatch noise(n, Matrix(horizon, dim));
  for (int k = 0; k < n; ++k) {
    for (int t = 0; t < horizon; ++t) {
      for (int j = 0; j < dim; ++j) {
        noise[k](t, j) = stddev[j] * rng.Normal();
      }
    }
  }
  return noise;
}

}  // namespace mpq

#endif  // MPQ_CORE_H_
