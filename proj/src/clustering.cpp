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

#include "sdiar/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>

#include "sdiar/assignment.hpp"
#include "sdiar/error.hpp"
#include "sdiar/kernels.hpp"
#include "sdiar/seed.hpp"

namespace sdiar {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

Matrix<double> kmeans_pp_init(const Matrix<double>& data, std::size_t k, std::uint64_t seed) {
  const std::size_t n = data.rows();
  if (k == 0) throw ConfigError("k must be at least 1");
  if (n < k) {
    throw DataError("k-means needs at least k points (n=" + std::to_string(n) +
                    ", k=" + std::to_string(k) + ")");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> chosen;
  std::vector<char> taken(n, 0);
  chosen.push_back(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
  taken[chosen.back()] = 1;

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(data.row(i), data.row(chosen[0]));

  while (chosen.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += taken[i] ? 0.0 : d2[i];
    std::size_t pick = n;
    if (total > 0.0) {
      const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      double cum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        cum += d2[i];
        if (cum > u) {
          pick = i;
          break;
        }
      }
      if (pick == n) {  // u landed on the rounding edge
        for (std::size_t i = n; i-- > 0;) {
          if (!taken[i] && d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // Remaining points coincide with chosen centroids; pick uniformly.
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i]) free.push_back(i);
      }
      pick = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
    }
    chosen.push_back(pick);
    taken[pick] = 1;
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(data.row(i), data.row(pick)));
  }
  return data.gather_rows(chosen);
}

KMeansResult kmeans_fit(const Matrix<double>& data, std::size_t k, std::uint64_t seed,
                        std::size_t max_iter, double tol) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  KMeansResult res;
  res.model.centroids = kmeans_pp_init(data, k, seed);
  auto& centroids = res.model.centroids;
  res.labels.assign(n, 0);
  std::vector<double> dist(n, 0.0);

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    kernels::assign_nearest(data, centroids, res.labels, dist);

    std::vector<std::size_t> counts(k, 0);
    for (auto l : res.labels) ++counts[l];
    std::vector<char> reseeded(n, 0);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (reseeded[i] || counts[res.labels[i]] < 2) continue;
        if (far == n || dist[i] > dist[far]) far = i;
      }
      if (far == n) continue;
      --counts[res.labels[far]];
      res.labels[far] = c;
      counts[c] = 1;
      dist[far] = 0.0;
      reseeded[far] = 1;
      std::copy_n(data.row(far).begin(), d, centroids.row(c).begin());
    }
    res.model.inertia_history.push_back(std::accumulate(dist.begin(), dist.end(), 0.0));

    Matrix<double> next(k, d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = next.row(res.labels[i]);
      auto src = data.row(i);
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      auto row = next.row(c);
      if (counts[c] == 0) {
        std::copy_n(centroids.row(c).begin(), d, row.begin());
      } else {
        for (auto& v : row) v /= static_cast<double>(counts[c]);
      }
      shift = std::max(shift, std::sqrt(sq_dist(row, centroids.row(c))));
    }
    centroids = std::move(next);
    res.model.iterations_run = iter + 1;
    if (shift < tol) break;
  }
  kernels::assign_nearest(data, centroids, res.labels, dist);
  res.model.inertia = std::accumulate(dist.begin(), dist.end(), 0.0);
  return res;
}

KMeansResult kmeans_fit_restarts(const Matrix<double>& data, std::size_t k, std::uint64_t seed,
                                 std::size_t restarts, std::size_t max_iter, double tol) {
  if (restarts == 0) throw ConfigError("k-means needs at least one run");
  KMeansResult best = kmeans_fit(data, k, seed, max_iter, tol);
  for (std::size_t r = 1; r < restarts; ++r) {
    KMeansResult run = kmeans_fit(data, k, derive_seed(seed, r), max_iter, tol);
    if (run.model.inertia < best.model.inertia) best = std::move(run);
  }
  return best;
}

Linkage parse_linkage(const std::string& name) {
  if (name == "average") return Linkage::kAverage;
  if (name == "complete") return Linkage::kComplete;
  if (name == "single") return Linkage::kSingle;
  throw ConfigError("unknown linkage '" + name + "'");
}

Metric parse_metric(const std::string& name) {
  if (name == "cosine") return Metric::kCosine;
  if (name == "euclidean") return Metric::kEuclidean;
  throw ConfigError("unknown metric '" + name + "'");
}

std::string to_string(Linkage l) {
  switch (l) {
    case Linkage::kAverage: return "average";
    case Linkage::kComplete: return "complete";
    case Linkage::kSingle: return "single";
  }
  return "?";
}

std::string to_string(Metric m) { return m == Metric::kCosine ? "cosine" : "euclidean"; }

Matrix<double> distance_matrix(const Matrix<double>& data, Metric metric) {
  Matrix<double> dist;
  if (metric == Metric::kCosine) {
    kernels::pairwise_cosine(data, data, dist);
  } else {
    kernels::pairwise_sq_euclidean(data, data, dist);
    for (auto& v : dist.flat()) v = std::sqrt(v);
  }
  for (std::size_t i = 0; i < dist.rows(); ++i) dist(i, i) = 0.0;
  return dist;
}

std::vector<std::size_t> ahc_fit(const Matrix<double>& data, const AhcConfig& config) {
  const std::size_t n = data.rows();
  if (config.target_clusters == 0) throw ConfigError("AHC target cluster count must be at least 1");
  if (n < config.target_clusters) {
    throw DataError("AHC needs at least as many points as target clusters");
  }
  Matrix<double> dist = distance_matrix(data, config.metric);
  std::vector<std::size_t> owner(n);  // point -> representative cluster index
  std::iota(owner.begin(), owner.end(), std::size_t{0});
  std::vector<std::size_t> size(n, 1);
  std::vector<char> active(n, 1);
  std::size_t clusters = n;

  while (clusters > config.target_clusters) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = n, bj = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        if (dist(i, j) < best) {
          best = dist(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    // Lance-Williams update, merging bj into bi.
    for (std::size_t m = 0; m < n; ++m) {
      if (!active[m] || m == bi || m == bj) continue;
      double v = 0.0;
      switch (config.linkage) {
        case Linkage::kAverage:
          v = (static_cast<double>(size[bi]) * dist(bi, m) +
               static_cast<double>(size[bj]) * dist(bj, m)) /
              static_cast<double>(size[bi] + size[bj]);
          break;
        case Linkage::kComplete: v = std::max(dist(bi, m), dist(bj, m)); break;
        case Linkage::kSingle: v = std::min(dist(bi, m), dist(bj, m)); break;
      }
      dist(bi, m) = v;
      dist(m, bi) = v;
    }
    size[bi] += size[bj];
    active[bj] = 0;
    for (auto& o : owner) {
      if (o == bj) o = bi;
    }
    --clusters;
  }
  return relabel_by_first_appearance(owner);
}

std::vector<std::size_t> relabel_by_first_appearance(std::span<const std::size_t> labels) {
  std::unordered_map<std::size_t, std::size_t> remap;
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (auto l : labels) {
    auto [it, inserted] = remap.try_emplace(l, remap.size());
    out.push_back(it->second);
  }
  return out;
}

double clustering_accuracy(std::span<const std::size_t> predicted,
                           std::span<const std::size_t> truth) {
  if (predicted.size() != truth.size()) throw ConfigError("label vectors differ in length");
  if (predicted.empty()) return 1.0;
  const std::size_t kp = *std::max_element(predicted.begin(), predicted.end()) + 1;
  const std::size_t kt = *std::max_element(truth.begin(), truth.end()) + 1;
  Matrix<double> counts(kp, kt, 0.0);
  for (std::size_t i = 0; i < predicted.size(); ++i) counts(predicted[i], truth[i]) += 1.0;
  const auto match = max_weight_assignment(counts);
  double hit = 0.0;
  for (std::size_t r = 0; r < kp; ++r) {
    if (match[r]) hit += counts(r, *match[r]);
  }
  return hit / static_cast<double>(predicted.size());
}

}  // namespace sdiar
