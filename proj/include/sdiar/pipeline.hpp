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

// Fixed-window segmentation, energy VAD and the embeddings -> labels ->
// turns path behind the `diarize` command.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdiar/annotation.hpp"
#include "sdiar/audio.hpp"
#include "sdiar/clustering.hpp"
#include "sdiar/embedding_io.hpp"
#include "sdiar/mix_sae.hpp"

namespace sdiar {

/// Samples [begin, end) and the matching times in seconds.
struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;
  double start = 0.0;
  double stop = 0.0;
};

/// Tiles n samples with windows of round(window_s * rate) samples. A tail of
/// at least half a window becomes its own segment, a shorter one is merged
/// into the previous segment. Throws ConfigError for window_s <= 0.
std::vector<Segment> tile_segments(std::size_t n_samples, int sample_rate, double window_s);

inline std::vector<Segment> segment_audio(const AudioBuffer& audio, double window_s) {
  return tile_segments(audio.samples.size(), audio.sample_rate, window_s);
}

struct VadConfig {
  double frame_s = 0.025;
  double hop_s = 0.010;
  double abs_floor = 1e-4;
  double rel_fraction = 0.1;
  double percentile = 95.0;
  /// A segment is speech when at least this share of its frames is active.
  double min_active = 0.5;
};

/// Linear-interpolation percentile, p in [0, 100].
double percentile(std::vector<double> values, double p);

class EnergyVad {
 public:
  EnergyVad(const AudioBuffer& audio, VadConfig config = {});

  double threshold() const noexcept { return threshold_; }
  const std::vector<double>& frame_rms() const noexcept { return rms_; }
  bool is_speech(const Segment& seg) const;

 private:
  const AudioBuffer* audio_;
  VadConfig config_;
  std::size_t frame_len_ = 0;
  std::size_t hop_ = 0;
  std::vector<double> rms_;
  double threshold_ = 0.0;
};

enum class Method { kMixSae, kKMeans, kAhc };
enum class Precision { kFloat32, kFloat64 };

Method parse_method(const std::string& name);
std::string to_string(Method m);
Precision parse_precision(const std::string& name);

struct PipelineOptions {
  Method method = Method::kMixSae;
  std::size_t k = 2;
  std::uint64_t seed = 0;
  /// k and input_dim are filled in from the call.
  MixSaeConfig mix{};
  AhcConfig ahc{};
  /// k-Means++ runs for the kmeans method; the lowest inertia wins.
  std::size_t kmeans_restarts = 10;
  Precision precision = Precision::kFloat32;
};

struct ClusterOutcome {
  std::vector<std::size_t> labels;
  std::optional<PretrainReport> pretrain;
  std::vector<MainEpochStats> main_log;
  /// Pseudo-labels at the end of pretraining (Mix-SAE only).
  std::vector<std::size_t> pretrain_labels;
  std::optional<MixSae<float>> model_f32;
  std::optional<MixSae<double>> model_f64;
};

/// Throws DataError when there are fewer rows than clusters and ConfigError
/// on an invalid method / k combination.
ClusterOutcome cluster_embeddings(const Matrix<double>& data, const PipelineOptions& options);

struct DiarizedTurn {
  double start = 0.0;
  double end = 0.0;
  std::size_t speaker = 0;
};

struct DiarizationResult {
  std::string recording_id;
  std::vector<DiarizedTurn> turns;

  /// Speakers are named "spk<id>".
  Annotation to_annotation() const;
};

/// Relabels by first appearance and merges contiguous same-speaker segments.
DiarizationResult assemble_diarization(const std::vector<SegmentTiming>& timings,
                                       const std::vector<std::size_t>& labels,
                                       const std::string& recording_id);

/// Clusters a timed embedding set and assembles turns. Throws DataError when
/// the set carries no timings.
DiarizationResult run_pipeline(const EmbeddingSet& set, const PipelineOptions& options,
                               ClusterOutcome* outcome = nullptr);

}  // namespace sdiar
