// Copyright 2026 The sdiar Authors
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

// Minimal layer substrate: explicit forward/backward per layer, gradients
// accumulated into per-layer buffers until zero_grad().

#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sdiar/matrix.hpp"

namespace sdiar::nn {

inline constexpr double kLeakySlope = 0.01;

/// View of one trainable tensor and its gradient buffer.
template <typename T>
struct ParamRef {
  std::string name;
  std::span<T> value;
  std::span<T> grad;
};

enum class Mode { kTrain, kEval };

/// Fully connected layer, y = x W^T + b.
template <typename T>
class Dense {
 public:
  Dense() = default;
  /// Glorot-uniform weights, zero bias.
  Dense(std::size_t in_dim, std::size_t out_dim, bool use_bias, std::mt19937_64& rng);
  Dense(Matrix<T> weights, std::vector<T> bias);

  Matrix<T> forward(const Matrix<T>& x);
  /// Forward without touching the cache; safe on shared frozen layers.
  Matrix<T> apply(const Matrix<T>& x) const;
  /// Accumulates parameter gradients and returns d loss / d x.
  Matrix<T> backward(const Matrix<T>& dy);
  void zero_grad();
  void collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out);

  std::size_t in_dim() const noexcept { return weights_.cols(); }
  std::size_t out_dim() const noexcept { return weights_.rows(); }
  bool has_bias() const noexcept { return !bias_.empty(); }

  Matrix<T>& weights() noexcept { return weights_; }
  const Matrix<T>& weights() const noexcept { return weights_; }
  std::vector<T>& bias() noexcept { return bias_; }
  const std::vector<T>& bias() const noexcept { return bias_; }
  const Matrix<T>& grad_weights() const noexcept { return grad_weights_; }
  const std::vector<T>& grad_bias() const noexcept { return grad_bias_; }

 private:
  Matrix<T> weights_;
  std::vector<T> bias_;
  Matrix<T> grad_weights_;
  std::vector<T> grad_bias_;
  Matrix<T> input_;
};

/// Per-feature batch normalization with running statistics.
template <typename T>
class BatchNorm {
 public:
  BatchNorm() = default;
  explicit BatchNorm(std::size_t dim, double eps = 1e-5, double momentum = 0.1);

  /// Train mode needs at least two rows.
  Matrix<T> forward(const Matrix<T>& x);
  Matrix<T> apply(const Matrix<T>& x) const;  // eval-mode, cache untouched
  Matrix<T> backward(const Matrix<T>& dy);
  void zero_grad();
  void collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out);

  void set_mode(Mode m) noexcept { mode_ = m; }
  Mode mode() const noexcept { return mode_; }
  std::size_t dim() const noexcept { return gamma_.size(); }
  double eps() const noexcept { return eps_; }
  double momentum() const noexcept { return momentum_; }

  std::vector<T>& gamma() noexcept { return gamma_; }
  std::vector<T>& beta() noexcept { return beta_; }
  std::vector<T>& running_mean() noexcept { return running_mean_; }
  std::vector<T>& running_var() noexcept { return running_var_; }
  const std::vector<T>& gamma() const noexcept { return gamma_; }
  const std::vector<T>& beta() const noexcept { return beta_; }
  const std::vector<T>& running_mean() const noexcept { return running_mean_; }
  const std::vector<T>& running_var() const noexcept { return running_var_; }
  const std::vector<T>& grad_gamma() const noexcept { return grad_gamma_; }
  const std::vector<T>& grad_beta() const noexcept { return grad_beta_; }

 private:
  double eps_ = 1e-5;
  double momentum_ = 0.1;
  Mode mode_ = Mode::kTrain;
  std::vector<T> gamma_, beta_, grad_gamma_, grad_beta_;
  std::vector<T> running_mean_, running_var_;
  // backward cache
  Matrix<T> normalized_;
  std::vector<T> inv_std_;
  Mode cached_mode_ = Mode::kTrain;
};

/// Leaky ReLU with a fixed negative slope.
template <typename T>
class LeakyRelu {
 public:
  explicit LeakyRelu(double slope = kLeakySlope) : slope_(static_cast<T>(slope)) {}
  Matrix<T> forward(const Matrix<T>& x);
  Matrix<T> apply(const Matrix<T>& x) const;
  Matrix<T> backward(const Matrix<T>& dy) const;
  T slope() const noexcept { return slope_; }

 private:
  T slope_;
  Matrix<T> input_;
};

template <typename T>
inline T leaky_relu(T x, T slope = static_cast<T>(kLeakySlope)) {
  return x >= T(0) ? x : slope * x;
}

template <typename T>
T sigmoid(T x);

/// Row-wise softmax with max subtraction.
template <typename T>
Matrix<T> softmax_rows(const Matrix<T>& logits);

/// Given p = softmax(z) and dL/dp, returns dL/dz.
template <typename T>
Matrix<T> softmax_backward(const Matrix<T>& p, const Matrix<T>& dp);

}  // namespace sdiar::nn
