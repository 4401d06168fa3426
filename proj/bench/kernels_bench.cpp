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

// Serial reference vs OpenMP kernels: wall time per call and a bit-equality
// check of the outputs. `--quick` shrinks the problem for smoke runs.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sdiar/kernels.hpp"
#include "sdiar/matrix.hpp"

using namespace sdiar;

namespace {

template <typename T>
Matrix<T> random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix<T> m(r, c);
  for (auto& v : m.flat()) v = static_cast<T>(normal(rng));
  return m;
}

double time_ms(const std::function<void()>& fn, int reps) {
  fn();
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

bool report(const char* name, double serial_ms, double parallel_ms, bool same) {
  std::printf("%-24s %10.3f %10.3f %8.2fx  %s\n", name, serial_ms, parallel_ms,
              parallel_ms > 0 ? serial_ms / parallel_ms : 0.0, same ? "identical" : "MISMATCH");
  return same;
}

}  // namespace

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
  const std::size_t n = quick ? 64 : 1024;
  const std::size_t in = quick ? 32 : 512;
  const std::size_t out = quick ? 16 : 256;
  const std::size_t pts = quick ? 200 : 20000;
  const std::size_t k = 8;
  const int reps = quick ? 2 : 10;
  std::mt19937_64 rng(42);

  std::printf("threads %d, batch %zu, %zu -> %zu, points %zu\n", kernels::parallel::max_threads(),
              n, in, out, pts);
  std::printf("%-24s %10s %10s %9s\n", "kernel", "serial ms", "omp ms", "speedup");

  const auto x = random_matrix<float>(n, in, rng);
  const auto w = random_matrix<float>(out, in, rng);
  const std::vector<float> b(out, 0.5f);
  const auto dy = random_matrix<float>(n, out, rng);
  bool ok = true;

  {
    Matrix<float> ys, yp;
    const double s = time_ms([&] { kernels::serial::linear_forward<float>(x, w, b, ys); }, reps);
    const double p = time_ms([&] { kernels::parallel::linear_forward<float>(x, w, b, yp); }, reps);
    ok &= report("linear_forward", s, p, ys == yp);
  }
  {
    Matrix<float> gs(out, in), gp(out, in);
    const double s = time_ms([&] { kernels::serial::linear_grad_weights(dy, x, gs); }, reps);
    const double p = time_ms([&] { kernels::parallel::linear_grad_weights(dy, x, gp); }, reps);
    ok &= report("linear_grad_weights", s, p, gs == gp);
  }
  {
    Matrix<float> ds, dp;
    const double s = time_ms([&] { kernels::serial::linear_grad_input(dy, w, ds); }, reps);
    const double p = time_ms([&] { kernels::parallel::linear_grad_input(dy, w, dp); }, reps);
    ok &= report("linear_grad_input", s, p, ds == dp);
  }

  const auto points = random_matrix<double>(pts, 32, rng);
  const auto centroids = random_matrix<double>(k, 32, rng);
  const auto sub = random_matrix<double>(quick ? 100 : 2000, 32, rng);
  {
    Matrix<double> es, ep;
    const double s = time_ms([&] { kernels::serial::pairwise_sq_euclidean(sub, sub, es); }, reps);
    const double p = time_ms([&] { kernels::parallel::pairwise_sq_euclidean(sub, sub, ep); }, reps);
    ok &= report("pairwise_sq_euclidean", s, p, es == ep);
  }
  {
    Matrix<double> cs, cp;
    const double s = time_ms([&] { kernels::serial::pairwise_cosine(sub, sub, cs); }, reps);
    const double p = time_ms([&] { kernels::parallel::pairwise_cosine(sub, sub, cp); }, reps);
    ok &= report("pairwise_cosine", s, p, cs == cp);
  }
  {
    std::vector<std::size_t> ls(pts), lp(pts);
    std::vector<double> ds(pts), dp(pts);
    const double s =
        time_ms([&] { kernels::serial::assign_nearest(points, centroids, ls, ds); }, reps);
    const double p =
        time_ms([&] { kernels::parallel::assign_nearest(points, centroids, lp, dp); }, reps);
    ok &= report("assign_nearest", s, p, ls == lp && ds == dp);
  }
  return ok ? 0 : 1;
}
