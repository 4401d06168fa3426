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

#include "sdiar/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sdiar/error.hpp"
#include "sdiar/pipeline.hpp"
#include "sdiar/seed.hpp"

namespace sdiar {

namespace {

constexpr std::uint64_t kTagCentroids = 1;
constexpr std::uint64_t kTagPoints = 2;
constexpr std::uint64_t kTagTurns = 3;
constexpr std::uint64_t kTagWindows = 4;

}  // namespace

void SynthSpec::validate() const {
  if (k < 1) throw ConfigError("synth: k must be positive");
  if (dim < k) throw ConfigError("synth: dim must be at least k");
  if (!(separation >= 0.0) || !std::isfinite(separation)) {
    throw ConfigError("synth: separation must be finite and non-negative");
  }
  if (!(turns.mean_turn_s > turns.min_turn_s) || turns.min_turn_s < 0.0) {
    throw ConfigError("synth: mean turn length must exceed the minimum turn length");
  }
  if (turns.silence_prob < 0.0 || turns.silence_prob > 1.0) {
    throw ConfigError("synth: silence probability must lie in [0, 1]");
  }
  if (!(turns.mean_silence_s > 0.0)) throw ConfigError("synth: mean silence must be positive");
  if (!(duration_s > 0.0)) throw ConfigError("synth: duration must be positive");
}

Matrix<double> synth_centroids(const SynthSpec& spec) {
  spec.validate();
  const std::size_t k = spec.k, dim = spec.dim;
  std::mt19937_64 rng(derive_seed(spec.seed, kTagCentroids));
  std::normal_distribution<double> normal;

  // Orthonormal columns q_0..q_{k-1} in R^dim by Gram-Schmidt.
  std::vector<std::vector<double>> basis;
  while (basis.size() < k) {
    std::vector<double> v(dim);
    for (auto& x : v) x = normal(rng);
    for (const auto& q : basis) {
      double dot = 0.0;
      for (std::size_t d = 0; d < dim; ++d) dot += v[d] * q[d];
      for (std::size_t d = 0; d < dim; ++d) v[d] -= dot * q[d];
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-8) continue;
    for (auto& x : v) x /= norm;
    basis.push_back(std::move(v));
  }

  // Simplex vertices e_i - mean(e) have pairwise distance sqrt(2).
  const double scale = spec.separation / std::sqrt(2.0);
  Matrix<double> c(k, dim);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double coef = scale * ((i == j ? 1.0 : 0.0) - 1.0 / static_cast<double>(k));
      for (std::size_t d = 0; d < dim; ++d) c(i, d) += coef * basis[j][d];
    }
  }
  return c;
}

SynthEmbeddings synth_embeddings(const SynthSpec& spec) {
  const Matrix<double> centroids = synth_centroids(spec);
  std::mt19937_64 rng(derive_seed(spec.seed, kTagPoints));
  std::normal_distribution<double> normal;
  const std::size_t n = spec.k * spec.points_per_cluster;
  SynthEmbeddings out;
  out.set.vectors = Matrix<float>(n, spec.dim);
  out.set.recording_id = "synth";
  out.set.source_tag = "synthetic";
  out.labels.reserve(n);
  for (std::size_t c = 0; c < spec.k; ++c) {
    for (std::size_t p = 0; p < spec.points_per_cluster; ++p) {
      const std::size_t row = c * spec.points_per_cluster + p;
      for (std::size_t d = 0; d < spec.dim; ++d) {
        out.set.vectors(row, d) = static_cast<float>(centroids(c, d) + normal(rng));
      }
      out.labels.push_back(c);
    }
  }
  return out;
}

Annotation synth_turns(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(derive_seed(spec.seed, kTagTurns));
  std::exponential_distribution<double> tail(1.0 / (spec.turns.mean_turn_s - spec.turns.min_turn_s));
  std::exponential_distribution<double> gap(1.0 / spec.turns.mean_silence_s);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Annotation a;
  a.recording_id = "synth";
  double t = 0.0;
  std::size_t speaker = 0;
  while (t < spec.duration_s) {
    const double end = std::min(spec.duration_s, t + spec.turns.min_turn_s + tail(rng));
    a.turns.push_back({t, end, "S" + std::to_string(speaker)});
    t = end;
    if (unit(rng) < spec.turns.silence_prob) t += gap(rng);
    speaker = (speaker + 1) % spec.k;
  }
  return a;
}

SynthConversation synth_conversation_from_turns(const Annotation& reference,
                                                const Matrix<double>& centroids,
                                                double window_s, std::uint64_t seed) {
  reference.validate();
  const auto speakers = reference.speakers();
  if (speakers.size() > centroids.rows()) {
    throw ConfigError("synth: reference has more speakers than centroids");
  }
  double duration = 0.0;
  for (const auto& t : reference.turns) duration = std::max(duration, t.end);
  const auto n_samples = static_cast<std::size_t>(std::llround(duration * kPipelineSampleRate));
  const auto windows = tile_segments(n_samples, kPipelineSampleRate, window_s);

  std::mt19937_64 rng(derive_seed(seed, kTagWindows));
  std::normal_distribution<double> normal;
  SynthConversation out;
  out.reference = reference;
  out.set.recording_id = reference.recording_id;
  out.set.source_tag = "synthetic";
  std::vector<float> rows;
  const std::size_t dim = centroids.cols();
  for (const auto& w : windows) {
    std::vector<double> cover(speakers.size(), 0.0);
    for (const auto& t : reference.turns) {
      const double ov = std::min(t.end, w.stop) - std::max(t.start, w.start);
      if (ov <= 0.0) continue;
      const auto s = static_cast<std::size_t>(
          std::lower_bound(speakers.begin(), speakers.end(), t.speaker) - speakers.begin());
      cover[s] += ov;
    }
    double speech = 0.0;
    for (double c : cover) speech += c;
    if (speech < 0.5 * (w.stop - w.start)) continue;
    const auto label =
        static_cast<std::size_t>(std::max_element(cover.begin(), cover.end()) - cover.begin());
    for (std::size_t d = 0; d < dim; ++d) {
      rows.push_back(static_cast<float>(centroids(label, d) + normal(rng)));
    }
    out.labels.push_back(label);
    out.set.timings.push_back({w.start, w.stop});
  }
  out.set.vectors = Matrix<float>(out.labels.size(), dim, std::move(rows));
  return out;
}

SynthConversation synth_conversation(const SynthSpec& spec, double window_s) {
  return synth_conversation_from_turns(synth_turns(spec), synth_centroids(spec), window_s,
                                       spec.seed);
}

}  // namespace sdiar
