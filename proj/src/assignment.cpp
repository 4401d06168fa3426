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

#include "sdiar/assignment.hpp"

#include <algorithm>
#include <limits>

namespace sdiar {

std::vector<std::optional<std::size_t>> max_weight_assignment(const Matrix<double>& score) {
  const std::size_t rows = score.rows();
  const std::size_t cols = score.cols();
  std::vector<std::optional<std::size_t>> result(rows);
  if (rows == 0 || cols == 0) return result;

  const std::size_t n = std::max(rows, cols);
  double top = 0.0;
  for (double v : score.flat()) top = std::max(top, v);
  // Minimization on cost = top - score, padding cells cost `top`.
  auto cost = [&](std::size_t r, std::size_t c) {
    return (r < rows && c < cols) ? top - score(r, c) : top;
  };

  // 1-based potentials formulation; p[j] is the row matched to column j.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t r = p[j] - 1;
    if (r < rows && j - 1 < cols) result[r] = j - 1;
  }
  return result;
}

}  // namespace sdiar
