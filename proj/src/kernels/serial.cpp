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

#include "sdiar/kernels.hpp"

#include "row_ops.hpp"

namespace sdiar::kernels::serial {

template <typename T>
void linear_forward(const Matrix<T>& x, const Matrix<T>& w, std::span<const T> bias,
                    Matrix<T>& y) {
  detail::check_linear(x.cols(), w.cols(), "linear_forward");
  if (y.rows() != x.rows() || y.cols() != w.rows()) y = Matrix<T>(x.rows(), w.rows());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.rows());
  for (std::ptrdiff_t i = 0; i < n; ++i) detail::linear_forward_row(x, w, bias, y, i);
}

template <typename T>
void linear_grad_weights(const Matrix<T>& dy, const Matrix<T>& x, Matrix<T>& gw) {
  if (dy.rows() != x.rows()) throw ConfigError("linear_grad_weights: batch size mismatch");
  require_same_shape(gw.rows(), gw.cols(), dy.cols(), x.cols(), "linear_grad_weights");
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(gw.rows());
  for (std::ptrdiff_t j = 0; j < n; ++j) detail::linear_grad_weights_row(dy, x, gw, j);
}

template <typename T>
void linear_grad_input(const Matrix<T>& dy, const Matrix<T>& w, Matrix<T>& dx) {
  detail::check_linear(dy.cols(), w.rows(), "linear_grad_input");
  if (dx.rows() != dy.rows() || dx.cols() != w.cols()) dx = Matrix<T>(dy.rows(), w.cols());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(dy.rows());
  for (std::ptrdiff_t i = 0; i < n; ++i) detail::linear_grad_input_row(dy, w, dx, i);
}

void pairwise_sq_euclidean(const Matrix<double>& a, const Matrix<double>& b,
                           Matrix<double>& out) {
  detail::check_linear(a.cols(), b.cols(), "pairwise_sq_euclidean");
  if (out.rows() != a.rows() || out.cols() != b.rows()) out = Matrix<double>(a.rows(), b.rows());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.rows());
  for (std::ptrdiff_t i = 0; i < n; ++i) detail::sq_euclidean_row(a, b, out, i);
}

void pairwise_cosine(const Matrix<double>& a, const Matrix<double>& b, Matrix<double>& out) {
  detail::check_linear(a.cols(), b.cols(), "pairwise_cosine");
  if (out.rows() != a.rows() || out.cols() != b.rows()) out = Matrix<double>(a.rows(), b.rows());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.rows());
  for (std::ptrdiff_t i = 0; i < n; ++i) detail::cosine_row(a, b, out, i);
}

void assign_nearest(const Matrix<double>& points, const Matrix<double>& centroids,
                    std::span<std::size_t> labels, std::span<double> sq_dist) {
  detail::check_linear(points.cols(), centroids.cols(), "assign_nearest");
  if (labels.size() != points.rows() || sq_dist.size() != points.rows()) {
    throw ConfigError("assign_nearest: output spans must have one entry per point");
  }
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(points.rows());
  for (std::ptrdiff_t i = 0; i < n; ++i) detail::assign_row(points, centroids, labels, sq_dist, i);
}

#define SDIAR_INSTANTIATE(T)                                                                   \
  template void linear_forward<T>(const Matrix<T>&, const Matrix<T>&, std::span<const T>,       \
                                  Matrix<T>&);                                                  \
  template void linear_grad_weights<T>(const Matrix<T>&, const Matrix<T>&, Matrix<T>&);        \
  template void linear_grad_input<T>(const Matrix<T>&, const Matrix<T>&, Matrix<T>&);

SDIAR_INSTANTIATE(float)
SDIAR_INSTANTIATE(double)
#undef SDIAR_INSTANTIATE

}  // namespace sdiar::kernels::serial
