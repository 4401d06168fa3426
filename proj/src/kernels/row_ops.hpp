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

// Per-row bodies shared by the serial and OpenMP kernels. Keeping a single
// definition is what makes the two variants bit-identical.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

#include "sdiar/matrix.hpp"

namespace sdiar::kernels::detail {

template <typename T>
inline void linear_forward_row(const Matrix<T>& x, const Matrix<T>& w, std::span<const T> bias,
                               Matrix<T>& y, std::size_t i) {
  const std::size_t in = x.cols();
  const T* xi = x.data() + i * in;
  T* yi = y.data() + i * w.rows();
  for (std::size_t j = 0; j < w.rows(); ++j) {
    const T* wj = w.data() + j * in;
    T acc = bias.empty() ? T(0) : bias[j];
    for (std::size_t k = 0; k < in; ++k) acc += wj[k] * xi[k];
    yi[j] = acc;
  }
}

template <typename T>
inline void linear_grad_weights_row(const Matrix<T>& dy, const Matrix<T>& x, Matrix<T>& gw,
                                    std::size_t j) {
  const std::size_t in = x.cols();
  T* gj = gw.data() + j * in;
  for (std::size_t i = 0; i < dy.rows(); ++i) {
    const T d = dy(i, j);
    if (d == T(0)) continue;
    const T* xi = x.data() + i * in;
    for (std::size_t k = 0; k < in; ++k) gj[k] += d * xi[k];
  }
}

template <typename T>
inline void linear_grad_input_row(const Matrix<T>& dy, const Matrix<T>& w, Matrix<T>& dx,
                                  std::size_t i) {
  const std::size_t in = w.cols();
  T* dxi = dx.data() + i * in;
  for (std::size_t k = 0; k < in; ++k) dxi[k] = T(0);
  for (std::size_t j = 0; j < w.rows(); ++j) {
    const T d = dy(i, j);
    if (d == T(0)) continue;
    const T* wj = w.data() + j * in;
    for (std::size_t k = 0; k < in; ++k) dxi[k] += d * wj[k];
  }
}

inline void sq_euclidean_row(const Matrix<double>& a, const Matrix<double>& b,
                             Matrix<double>& out, std::size_t i) {
  const std::size_t d = a.cols();
  const double* ai = a.data() + i * d;
  for (std::size_t j = 0; j < b.rows(); ++j) {
    const double* bj = b.data() + j * d;
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double t = ai[k] - bj[k];
      acc += t * t;
    }
    out(i, j) = acc;
  }
}

inline double norm2(const double* v, std::size_t d) {
  double acc = 0.0;
  for (std::size_t k = 0; k < d; ++k) acc += v[k] * v[k];
  return std::sqrt(acc);
}

inline void cosine_row(const Matrix<double>& a, const Matrix<double>& b, Matrix<double>& out,
                       std::size_t i) {
  const std::size_t d = a.cols();
  const double* ai = a.data() + i * d;
  const double na = norm2(ai, d);
  for (std::size_t j = 0; j < b.rows(); ++j) {
    const double* bj = b.data() + j * d;
    const double nb = norm2(bj, d);
    double dot = 0.0;
    for (std::size_t k = 0; k < d; ++k) dot += ai[k] * bj[k];
    const double denom = na * nb;
    out(i, j) = denom > 0.0 ? 1.0 - dot / denom : 1.0;
  }
}

inline void assign_row(const Matrix<double>& points, const Matrix<double>& centroids,
                       std::span<std::size_t> labels, std::span<double> sq_dist,
                       std::size_t i) {
  const std::size_t d = points.cols();
  const double* p = points.data() + i * d;
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double* q = centroids.data() + c * d;
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double t = p[k] - q[k];
      acc += t * t;
    }
    if (acc < best) {
      best = acc;
      arg = c;
    }
  }
  labels[i] = arg;
  sq_dist[i] = best;
}

inline void check_linear(std::size_t x_cols, std::size_t w_cols, const char* what) {
  if (x_cols != w_cols) {
    throw ConfigError(std::string(what) + ": input has " + std::to_string(x_cols) +
                      " columns but layer expects " + std::to_string(w_cols));
  }
}

}  // namespace sdiar::kernels::detail
