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

// Hot loops of the toolkit. Every kernel exists twice: a plain serial
// reference in `serial::` and an OpenMP version in `parallel::`. The parallel
// variants split work over output rows only and run the same per-row code as
// the serial loops, so both produce bit-identical results for any thread
// count. The unqualified entry points dispatch to `parallel::`.

#pragma once

#include <cstddef>
#include <span>

#include "sdiar/matrix.hpp"

namespace sdiar::kernels {

namespace serial {

/// y = x * w^T + bias (bias may be empty). x: N x in, w: out x in, y resized to N x out.
template <typename T>
void linear_forward(const Matrix<T>& x, const Matrix<T>& w, std::span<const T> bias,
                    Matrix<T>& y);
/// gw += dy^T * x
template <typename T>
void linear_grad_weights(const Matrix<T>& dy, const Matrix<T>& x, Matrix<T>& gw);
/// dx = dy * w, dx resized to N x in.
template <typename T>
void linear_grad_input(const Matrix<T>& dy, const Matrix<T>& w, Matrix<T>& dx);

void pairwise_sq_euclidean(const Matrix<double>& a, const Matrix<double>& b,
                           Matrix<double>& out);
/// out(i, j) = 1 - cos(a_i, b_j). A zero vector has cosine 0 with everything.
void pairwise_cosine(const Matrix<double>& a, const Matrix<double>& b, Matrix<double>& out);
/// Nearest centroid per row, ties to the lowest index.
void assign_nearest(const Matrix<double>& points, const Matrix<double>& centroids,
                    std::span<std::size_t> labels, std::span<double> sq_dist);

}  // namespace serial

namespace parallel {

template <typename T>
void linear_forward(const Matrix<T>& x, const Matrix<T>& w, std::span<const T> bias,
                    Matrix<T>& y);
template <typename T>
void linear_grad_weights(const Matrix<T>& dy, const Matrix<T>& x, Matrix<T>& gw);
template <typename T>
void linear_grad_input(const Matrix<T>& dy, const Matrix<T>& w, Matrix<T>& dx);

void pairwise_sq_euclidean(const Matrix<double>& a, const Matrix<double>& b,
                           Matrix<double>& out);
void pairwise_cosine(const Matrix<double>& a, const Matrix<double>& b, Matrix<double>& out);
void assign_nearest(const Matrix<double>& points, const Matrix<double>& centroids,
                    std::span<std::size_t> labels, std::span<double> sq_dist);

/// 1 when built without OpenMP.
int max_threads();

}  // namespace parallel

template <typename T>
void linear_forward(const Matrix<T>& x, const Matrix<T>& w, std::span<const T> bias,
                    Matrix<T>& y) {
  parallel::linear_forward(x, w, bias, y);
}
template <typename T>
void linear_grad_weights(const Matrix<T>& dy, const Matrix<T>& x, Matrix<T>& gw) {
  parallel::linear_grad_weights(dy, x, gw);
}
template <typename T>
void linear_grad_input(const Matrix<T>& dy, const Matrix<T>& w, Matrix<T>& dx) {
  parallel::linear_grad_input(dy, w, dx);
}
inline void pairwise_sq_euclidean(const Matrix<double>& a, const Matrix<double>& b,
                                  Matrix<double>& out) {
  parallel::pairwise_sq_euclidean(a, b, out);
}
inline void pairwise_cosine(const Matrix<double>& a, const Matrix<double>& b,
                            Matrix<double>& out) {
  parallel::pairwise_cosine(a, b, out);
}
inline void assign_nearest(const Matrix<double>& points, const Matrix<double>& centroids,
                           std::span<std::size_t> labels, std::span<double> sq_dist) {
  parallel::assign_nearest(points, centroids, labels, sq_dist);
}

}  // namespace sdiar::kernels
