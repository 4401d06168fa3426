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

#include "sdiar/nn.hpp"

#include <algorithm>
#include <cmath>

#include "sdiar/error.hpp"
#include "sdiar/kernels.hpp"

namespace sdiar::nn {

// ---------------------------------------------------------------- Dense

template <typename T>
Dense<T>::Dense(std::size_t in_dim, std::size_t out_dim, bool use_bias, std::mt19937_64& rng)
    : weights_(out_dim, in_dim),
      bias_(use_bias ? out_dim : 0, T(0)),
      grad_weights_(out_dim, in_dim),
      grad_bias_(use_bias ? out_dim : 0, T(0)) {
  if (in_dim == 0 || out_dim == 0) throw ConfigError("dense layer dimensions must be positive");
  const double limit = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (auto& w : weights_.flat()) w = static_cast<T>(dist(rng));
}

template <typename T>
Dense<T>::Dense(Matrix<T> weights, std::vector<T> bias)
    : weights_(std::move(weights)),
      bias_(std::move(bias)),
      grad_weights_(weights_.rows(), weights_.cols()),
      grad_bias_(bias_.size(), T(0)) {
  if (!bias_.empty() && bias_.size() != weights_.rows()) {
    throw ConfigError("dense bias length " + std::to_string(bias_.size()) +
                      " does not match output dim " + std::to_string(weights_.rows()));
  }
}

template <typename T>
Matrix<T> Dense<T>::apply(const Matrix<T>& x) const {
  Matrix<T> y;
  kernels::linear_forward(x, weights_, std::span<const T>(bias_), y);
  return y;
}

template <typename T>
Matrix<T> Dense<T>::forward(const Matrix<T>& x) {
  Matrix<T> y = apply(x);
  input_ = x;
  return y;
}

template <typename T>
Matrix<T> Dense<T>::backward(const Matrix<T>& dy) {
  require_same_shape(dy.rows(), dy.cols(), input_.rows(), out_dim(), "dense backward");
  kernels::linear_grad_weights(dy, input_, grad_weights_);
  if (!bias_.empty()) {
    for (std::size_t i = 0; i < dy.rows(); ++i) {
      for (std::size_t j = 0; j < dy.cols(); ++j) grad_bias_[j] += dy(i, j);
    }
  }
  Matrix<T> dx;
  kernels::linear_grad_input(dy, weights_, dx);
  return dx;
}

template <typename T>
void Dense<T>::zero_grad() {
  grad_weights_.fill(T(0));
  std::fill(grad_bias_.begin(), grad_bias_.end(), T(0));
}

template <typename T>
void Dense<T>::collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out) {
  out.push_back({prefix + ".weight", weights_.flat(), grad_weights_.flat()});
  if (!bias_.empty()) out.push_back({prefix + ".bias", bias_, grad_bias_});
}

// ------------------------------------------------------------ BatchNorm

template <typename T>
BatchNorm<T>::BatchNorm(std::size_t dim, double eps, double momentum)
    : eps_(eps),
      momentum_(momentum),
      gamma_(dim, T(1)),
      beta_(dim, T(0)),
      grad_gamma_(dim, T(0)),
      grad_beta_(dim, T(0)),
      running_mean_(dim, T(0)),
      running_var_(dim, T(1)) {
  if (!(eps > 0.0)) throw ConfigError("batch-norm eps must be positive");
  if (!(momentum > 0.0 && momentum < 1.0)) throw ConfigError("batch-norm momentum must be in (0,1)");
}

template <typename T>
Matrix<T> BatchNorm<T>::apply(const Matrix<T>& x) const {
  if (x.cols() != dim()) throw ConfigError("batch-norm input has wrong feature dim");
  Matrix<T> y(x.rows(), x.cols());
  for (std::size_t c = 0; c < dim(); ++c) {
    const double inv = 1.0 / std::sqrt(static_cast<double>(running_var_[c]) + eps_);
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const double xh = (static_cast<double>(x(i, c)) - running_mean_[c]) * inv;
      y(i, c) = static_cast<T>(gamma_[c] * xh + beta_[c]);
    }
  }
  return y;
}

template <typename T>
Matrix<T> BatchNorm<T>::forward(const Matrix<T>& x) {
  if (x.cols() != dim()) {
    throw ConfigError("batch-norm input has " + std::to_string(x.cols()) + " features, expected " +
                      std::to_string(dim()));
  }
  const std::size_t n = x.rows();
  cached_mode_ = mode_;
  normalized_ = Matrix<T>(n, dim());
  inv_std_.assign(dim(), T(0));
  Matrix<T> y(n, dim());
  if (mode_ == Mode::kEval) {
    for (std::size_t c = 0; c < dim(); ++c) {
      const double inv = 1.0 / std::sqrt(static_cast<double>(running_var_[c]) + eps_);
      inv_std_[c] = static_cast<T>(inv);
      for (std::size_t i = 0; i < n; ++i) {
        const T xh = static_cast<T>((static_cast<double>(x(i, c)) - running_mean_[c]) * inv);
        normalized_(i, c) = xh;
        y(i, c) = gamma_[c] * xh + beta_[c];
      }
    }
    return y;
  }
  if (n < 2) throw DataError("batch-norm in train mode needs a batch of at least 2 rows");
  for (std::size_t c = 0; c < dim(); ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x(i, c);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = x(i, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps_);
    inv_std_[c] = static_cast<T>(inv);
    for (std::size_t i = 0; i < n; ++i) {
      const T xh = static_cast<T>((x(i, c) - mean) * inv);
      normalized_(i, c) = xh;
      y(i, c) = gamma_[c] * xh + beta_[c];
    }
    const double unbiased = var * static_cast<double>(n) / static_cast<double>(n - 1);
    running_mean_[c] = static_cast<T>((1.0 - momentum_) * running_mean_[c] + momentum_ * mean);
    running_var_[c] = static_cast<T>((1.0 - momentum_) * running_var_[c] + momentum_ * unbiased);
  }
  return y;
}

template <typename T>
Matrix<T> BatchNorm<T>::backward(const Matrix<T>& dy) {
  const std::size_t n = normalized_.rows();
  require_same_shape(dy.rows(), dy.cols(), n, dim(), "batch-norm backward");
  Matrix<T> dx(n, dim());
  for (std::size_t c = 0; c < dim(); ++c) {
    double sum_dy = 0.0, sum_dy_xh = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum_dy += dy(i, c);
      sum_dy_xh += static_cast<double>(dy(i, c)) * normalized_(i, c);
    }
    grad_beta_[c] += static_cast<T>(sum_dy);
    grad_gamma_[c] += static_cast<T>(sum_dy_xh);
    const double g = gamma_[c];
    const double inv = inv_std_[c];
    if (cached_mode_ == Mode::kEval) {
      for (std::size_t i = 0; i < n; ++i) dx(i, c) = static_cast<T>(dy(i, c) * g * inv);
      continue;
    }
    const double nn = static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double dxh = dy(i, c) * g;
      dx(i, c) = static_cast<T>(inv / nn *
                                (nn * dxh - g * sum_dy - normalized_(i, c) * g * sum_dy_xh));
    }
  }
  return dx;
}

template <typename T>
void BatchNorm<T>::zero_grad() {
  std::fill(grad_gamma_.begin(), grad_gamma_.end(), T(0));
  std::fill(grad_beta_.begin(), grad_beta_.end(), T(0));
}

template <typename T>
void BatchNorm<T>::collect_params(const std::string& prefix, std::vector<ParamRef<T>>& out) {
  out.push_back({prefix + ".gamma", gamma_, grad_gamma_});
  out.push_back({prefix + ".beta", beta_, grad_beta_});
}

// ---------------------------------------------------------- activations

template <typename T>
Matrix<T> LeakyRelu<T>::apply(const Matrix<T>& x) const {
  Matrix<T> y(x.rows(), x.cols());
  auto src = x.flat();
  auto dst = y.flat();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = leaky_relu(src[i], slope_);
  return y;
}

template <typename T>
Matrix<T> LeakyRelu<T>::forward(const Matrix<T>& x) {
  input_ = x;
  return apply(x);
}

template <typename T>
Matrix<T> LeakyRelu<T>::backward(const Matrix<T>& dy) const {
  require_same_shape(dy.rows(), dy.cols(), input_.rows(), input_.cols(), "leaky-relu backward");
  Matrix<T> dx(dy.rows(), dy.cols());
  auto in = input_.flat();
  auto g = dy.flat();
  auto out = dx.flat();
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = in[i] >= T(0) ? g[i] : slope_ * g[i];
  return dx;
}

template <typename T>
T sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T>
Matrix<T> softmax_rows(const Matrix<T>& logits) {
  Matrix<T> p(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto z = logits.row(i);
    auto out = p.row(i);
    if (z.empty()) continue;
    const T mx = *std::max_element(z.begin(), z.end());
    T sum = T(0);
    for (std::size_t j = 0; j < z.size(); ++j) {
      out[j] = std::exp(z[j] - mx);
      sum += out[j];
    }
    for (auto& v : out) v /= sum;
  }
  return p;
}

template <typename T>
Matrix<T> softmax_backward(const Matrix<T>& p, const Matrix<T>& dp) {
  require_same_shape(p.rows(), p.cols(), dp.rows(), dp.cols(), "softmax backward");
  Matrix<T> dz(p.rows(), p.cols());
  for (std::size_t i = 0; i < p.rows(); ++i) {
    T dot = T(0);
    for (std::size_t j = 0; j < p.cols(); ++j) dot += p(i, j) * dp(i, j);
    for (std::size_t j = 0; j < p.cols(); ++j) dz(i, j) = p(i, j) * (dp(i, j) - dot);
  }
  return dz;
}

template class Dense<float>;
template class Dense<double>;
template class BatchNorm<float>;
template class BatchNorm<double>;
template class LeakyRelu<float>;
template class LeakyRelu<double>;
template float sigmoid<float>(float);
template double sigmoid<double>(double);
template Matrix<float> softmax_rows<float>(const Matrix<float>&);
template Matrix<double> softmax_rows<double>(const Matrix<double>&);
template Matrix<float> softmax_backward<float>(const Matrix<float>&, const Matrix<float>&);
template Matrix<double> softmax_backward<double>(const Matrix<double>&, const Matrix<double>&);

}  // namespace sdiar::nn
