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

// Classical clusterers: k-Means++ seeding, Lloyd iterations and naive
// agglomerative clustering. All operate on double-precision rows.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sdiar/matrix.hpp"

namespace sdiar {

struct KMeansModel {
  Matrix<double> centroids;
  double inertia = 0.0;
  std::size_t iterations_run = 0;
  /// Inertia after every assignment step; non-increasing.
  std::vector<double> inertia_history;
};

struct KMeansResult {
  KMeansModel model;
  std::vector<std::size_t> labels;
};

/// k-Means++ seeding. Throws DataError when n < k.
Matrix<double> kmeans_pp_init(const Matrix<double>& data, std::size_t k, std::uint64_t seed);

/// Lloyd's algorithm from k-Means++ seeds, stopping once no centroid moves
/// more than `tol` or after `max_iter` iterations. Empty clusters are reseeded
/// to the point farthest from its current centroid.
KMeansResult kmeans_fit(const Matrix<double>& data, std::size_t k, std::uint64_t seed,
                        std::size_t max_iter = 300, double tol = 1e-6);

/// Best of `restarts` runs by final inertia; run 0 uses `seed` itself.
KMeansResult kmeans_fit_restarts(const Matrix<double>& data, std::size_t k, std::uint64_t seed,
                                 std::size_t restarts, std::size_t max_iter = 300,
                                 double tol = 1e-6);

enum class Linkage { kAverage, kComplete, kSingle };
enum class Metric { kCosine, kEuclidean };

struct AhcConfig {
  Linkage linkage = Linkage::kAverage;
  Metric metric = Metric::kCosine;
  std::size_t target_clusters = 2;
};

Linkage parse_linkage(const std::string& name);
Metric parse_metric(const std::string& name);
std::string to_string(Linkage l);
std::string to_string(Metric m);

/// Pairwise distance matrix under `metric`.
Matrix<double> distance_matrix(const Matrix<double>& data, Metric metric);

/// Agglomerative clustering from singletons down to `target_clusters`.
/// The closest pair merges first; ties go to the lowest (i, j) pair. Labels
/// are numbered by first appearance.
std::vector<std::size_t> ahc_fit(const Matrix<double>& data, const AhcConfig& config);

/// Renumbers labels so ids appear in increasing order of first occurrence.
std::vector<std::size_t> relabel_by_first_appearance(std::span<const std::size_t> labels);

/// Fraction of points whose predicted cluster agrees with the truth under
/// the best one-to-one mapping of cluster ids.
double clustering_accuracy(std::span<const std::size_t> predicted,
                           std::span<const std::size_t> truth);

}  // namespace sdiar
