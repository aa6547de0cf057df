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

#ifndef MPQ_QNETWORK_H_
#define MPQ_QNETWORK_H_

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mpq/core.h"
#include "mpq/mppi.h"
#include "mpq/rng.h"

namespace mpq {

// Feed-forward soft Q-function: tanh hidden layers, linear scalar output.
// All weights and biases live in one flat vector; layer l occupies a
// column-major (out x in) weight block followed by its bias.
class QNetwork {
 public:
  QNetwork() = default;

  // zero-initialized network with the given layer widths, e.g. {4, 100, 100, 1}
  explicit QNetwork(std::vector<int> layer_sizes)
      : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) {
      throw InvalidArgument("QNetwork: need at least input and output sizes");
    }
    for (int s : sizes_) {
      if (s < 1) throw InvalidArgument("QNetwork: layer sizes must be >= 1");
    }
    if (sizes_.back() != 1) {
      throw InvalidArgument("QNetwork: output layer must have width 1");
    }
    size_t n = 0;
    for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
      offsets_.push_back(n);
      n += static_cast<size_t>(sizes_[l + 1]) * (sizes_[l] + 1);
    }
    params_ = Vector::Zero(static_cast<Eigen::Index>(n));
  }

  // uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases
  static QNetwork Initialized(std::vector<int> layer_sizes, RngStream& rng) {
    QNetwork net(std::move(layer_sizes));
    for (int l = 0; l < net.num_layers(); ++l) {
      const double bound = 1.0 / std::sqrt(double(net.sizes_[l]));
      auto w = net.weights(l);
      auto b = net.bias(l);
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
          w(i, j) = rng.Uniform(-bound, bound);
        }
      }
      for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = rng.Uniform(-bound, bound);
    }
    return net;
  }

  // obs_dim + action_dim -> hidden... -> 1
  static QNetwork ForTask(int obs_dim, int action_dim,
                          const std::vector<int>& hidden, RngStream& rng) {
    std::vector<int> sizes{obs_dim + action_dim};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(1);
    return Initialized(std::move(sizes), rng);
  }

  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  int input_dim() const { return sizes_.front(); }
  const std::vector<int>& layer_sizes() const { return sizes_; }
  int num_parameters() const { return static_cast<int>(params_.size()); }

  const Vector& parameters() const { return params_; }
  Vector& parameters() { return params_; }

  Eigen::Map<Matrix> weights(int l) {
    return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
  }
  Eigen::Map<const Matrix> weights(int l) const {
    return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
  }
  Eigen::Map<Vector> bias(int l) {
    return {params_.data() + offsets_[l] + size_t(sizes_[l + 1]) * sizes_[l],
            sizes_[l + 1]};
  }
  Eigen::Map<const Vector> bias(int l) const {
    return {params_.data() + offsets_[l] + size_t(sizes_[l + 1]) * sizes_[l],
            sizes_[l + 1]};
  }

  // columns of `inputs` are samples
  Vector Forward(const Matrix& inputs) const {
    if (inputs.rows() != input_dim()) {
      throw InvalidArgument("QNetwork: input dimension mismatch");
    }
    Matrix a = inputs;
    for (int l = 0; l < num_layers(); ++l) {
      Matrix z = weights(l) * a;
      z.colwise() += bias(l);
      if (l + 1 < num_layers()) {
        a = z.array().tanh().matrix();
      } else {
        a = std::move(z);
      }
    }
    return a.row(0).transpose();
  }

  double Forward(const Vector& observation, const Vector& action) const {
    Matrix x(observation.size() + action.size(), 1);
    x << observation, action;
    return Forward(x)[0];
  }

  Vector Forward(const Matrix& observations, const Matrix& actions) const {
    if (observations.cols() != actions.cols()) {
      throw InvalidArgument("QNetwork: batch size mismatch");
    }
    Matrix x(observations.rows() + actions.rows(), observations.cols());
    x << observations, actions;
    return Forward(x);
  }

  friend bool operator==(const QNetwork& a, const QNetwork& b) {
    return a.sizes_ == b.sizes_ && a.params_.size() == b.params_.size() &&
           std::memcmp(a.params_.data(), b.params_.data(),
                       sizeof(double) * a.params_.size()) == 0;
  }

 private:
  std::vector<int> sizes_;
  std::vector<size_t> offsets_;
  Vector params_;
};

// Terminal Q backed by a network. The network must outlive the returned
// function.
inline TerminalQ NetworkQ(const QNetwork& net) {
  return [&net](const Matrix& observations, const Matrix& actions) {
    return net.Forward(observations, actions);
  };
}

// K rows of experience: column k of observations/actions pairs with
// targets[k].
struct MiniBatch {
  Matrix observations;
  Matrix actions;
  Vector targets;

  int size() const { return static_cast<int>(targets.size()); }

  Matrix Inputs() const {
    if (observations.cols() != targets.size() ||
        actions.cols() != targets.size()) {
      throw InvalidArgument("MiniBatch: inconsistent K across fields");
    }
    Matrix x(observations.rows() + actions.rows(), targets.size());
    x << observations, actions;
    return x;
  }
};

// L = 1/K sum_k (y_k - Q(s_k, a_k))^2
inline double Loss(const QNetwork& net, const MiniBatch& batch) {
  const Vector q = net.Forward(batch.Inputs());
  return (batch.targets - q).squaredNorm() / batch.size();
}

// exact reverse-mode gradient of Loss with respect to every parameter
inline Vector LossGradient(const QNetwork& net, const MiniBatch& batch) {
  const int k = batch.size();
  if (k < 1) throw InvalidArgument("LossGradient: empty batch");
  const int layers = net.num_layers();
  std::vector<Matrix> activations;
  activations.reserve(layers + 1);
  activations.push_back(batch.Inputs());
  if (activations[0].rows() != net.input_dim()) {
    throw InvalidArgument("LossGradient: input dimension mismatch");
  }
  for (int l = 0; l < layers; ++l) {
    Matrix z = net.weights(l) * activations.back();
    z.colwise() += net.bias(l);
    if (l + 1 < layers) z = z.array().tanh().matrix();
    activations.push_back(std::move(z));
  }

  QNetwork grad = net;  // same layout, reused as the gradient record
  // dL/dz at the output
  Matrix delta =
      (2.0 / k) * (activations.back().row(0) - batch.targets.transpose());
  for (int l = layers - 1; l >= 0; --l) {
    grad.weights(l) = delta * activations[l].transpose();
    grad.bias(l) = delta.rowwise().sum();
    if (l > 0) {
      Matrix back = net.weights(l).transpose() * delta;
      delta = back.array() * (1.0 - activations[l].array().square());
    }
  }
  return grad.parameters();
}

// central differences (L(theta + h e_i) - L(theta - h e_i)) / 2h
inline Vector FiniteDiffGradient(const QNetwork& net, const MiniBatch& batch,
                                 double h) {
  if (!(h > 0.0)) throw InvalidArgument("FiniteDiffGradient: h must be > 0");
  QNetwork probe = net;
  Vector grad(net.num_parameters());
  for (int i = 0; i < net.num_parameters(); ++i) {
    const double original = probe.parameters()[i];
    probe.parameters()[i] = original + h;
    const double plus = Loss(probe, batch);
    probe.parameters()[i] = original - h;
    const double minus = Loss(probe, batch);
    probe.parameters()[i] = original;
    grad[i] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

struct AdamState {
  Vector first_moment;
  Vector second_moment;
  int64_t step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState For(const QNetwork& net, double learning_rate = 1e-3) {
    AdamState s;
    s.first_moment = Vector::Zero(net.num_parameters());
    s.second_moment = Vector::Zero(net.num_parameters());
    s.learning_rate = learning_rate;
    return s;
  }
};

// bias-corrected Adam update of the network parameters, in place
inline void AdamStep(QNetwork& net, const Vector& grad, AdamState& state) {
  if (grad.size() != net.num_parameters() ||
      state.first_moment.size() != grad.size() ||
      state.second_moment.size() != grad.size()) {
    throw InvalidArgument("AdamStep: shape mismatch");
  }
  if (!grad.allFinite()) throw NumericalError("AdamStep: non-finite gradient");
  state.step += 1;
  state.first_moment =
      state.beta1 * state.first_moment + (1.0 - state.beta1) * grad;
  state.second_moment = state.beta2 * state.second_moment +
                        (1.0 - state.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(state.beta1, double(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, double(state.step));
  net.parameters().array() -=
      state.learning_rate * (state.first_moment.array() / c1) /
      ((state.second_moment.array() / c2).sqrt() + state.epsilon);
}

// Checkpoint layout (little-endian):
//   char[8] "MPQQNET\0", uint32 version, uint32 layer count L+1,
//   int32 sizes[L+1], uint64 parameter count, float64 parameters[]
inline constexpr char kCheckpointMagic[8] = {'M', 'P', 'Q', 'Q',
                                             'N', 'E', 'T', '\0'};
inline constexpr uint32_t kCheckpointVersion = 1;

inline void SaveCheckpoint(const QNetwork& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  const uint32_t version = kCheckpointVersion;
  const uint32_t count = static_cast<uint32_t>(net.layer_sizes().size());
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (int s : net.layer_sizes()) {
    const int32_t v = s;
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  const uint64_t n = static_cast<uint64_t>(net.num_parameters());
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(net.parameters().data()),
            static_cast<std::streamsize>(sizeof(double) * n));
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

inline QNetwork LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("not a Q-network checkpoint: " + path);
  }
  uint32_t version = 0;
  uint32_t count = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!in || version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version in " + path);
  }
  if (count < 2 || count > 64) {
    throw std::runtime_error("corrupt checkpoint layer count in " + path);
  }
  std::vector<int> sizes(count);
  for (auto& s : sizes) {
    int32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    s = v;
  }
  QNetwork net(sizes);
  uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!in || n != static_cast<uint64_t>(net.num_parameters())) {
    throw std::runtime_error("checkpoint parameter count mismatch in " + path);
  }
  in.read(reinterpret_cast<char*>(net.parameters().data()),
          static_cast<std::streamsize>(sizeof(double) * n));
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  if (!net.parameters().allFinite()) {
    throw std::runtime_error("checkpoint contains non-finite parameters");
  }
  return net;
}

}  // namespace mpq

#endif  // MPQ_QNETWORK_H_
