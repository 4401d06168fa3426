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

// Seeded synthetic data: Gaussian speaker clusters and windowed two-speaker
// conversations with a matching reference annotation.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sdiar/annotation.hpp"
#include "sdiar/embedding_io.hpp"
#include "sdiar/matrix.hpp"

namespace sdiar {

struct TurnModel {
  double mean_turn_s = 4.0;
  /// Turns are min_turn_s plus an exponential tail, so the mean stays mean_turn_s.
  double min_turn_s = 1.0;
  double silence_prob = 0.0;
  double mean_silence_s = 1.0;
};

struct SynthSpec {
  std::size_t k = 2;
  std::size_t dim = 32;
  std::size_t points_per_cluster = 200;
  /// Centroid distance in units of the within-cluster std.
  double separation = 6.0;
  std::uint64_t seed = 0;
  TurnModel turns{};
  double duration_s = 180.0;

  void validate() const;
};

/// k centroids on a regular simplex with edge `separation`, rotated into
/// `dim` dimensions by a seeded random orthonormal basis.
Matrix<double> synth_centroids(const SynthSpec& spec);

struct SynthEmbeddings {
  EmbeddingSet set;
  std::vector<std::size_t> labels;
};

/// points_per_cluster unit-variance samples around each centroid, in
/// cluster order.
SynthEmbeddings synth_embeddings(const SynthSpec& spec);

struct SynthConversation {
  EmbeddingSet set;
  Annotation reference;
  /// Majority speaker of each emitted window.
  std::vector<std::size_t> labels;
};

/// Speaker turns of a conversation; speakers alternate cyclically.
Annotation synth_turns(const SynthSpec& spec);

/// One embedding per W-window with at least half of it covered by speech,
/// drawn from the majority speaker's cluster. Speakers are indexed by
/// sorted name.
SynthConversation synth_conversation_from_turns(const Annotation& reference,
                                                const Matrix<double>& centroids,
                                                double window_s, std::uint64_t seed);

SynthConversation synth_conversation(const SynthSpec& spec, double window_s);

}  // namespace sdiar
