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

#include "sdiar/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "sdiar/error.hpp"

namespace sdiar {

std::vector<Segment> tile_segments(std::size_t n_samples, int sample_rate, double window_s) {
  if (!(window_s > 0.0) || !std::isfinite(window_s)) {
    throw ConfigError("window length must be positive, got " + std::to_string(window_s));
  }
  if (sample_rate <= 0) throw ConfigError("sample rate must be positive");
  const auto w = static_cast<std::size_t>(std::llround(window_s * sample_rate));
  if (w == 0) throw ConfigError("window shorter than one sample");
  std::vector<Segment> segs;
  if (n_samples == 0) return segs;
  const std::size_t full = n_samples / w;
  const std::size_t tail = n_samples % w;
  for (std::size_t i = 0; i < full; ++i) segs.push_back({i * w, (i + 1) * w});
  if (tail > 0) {
    if (segs.empty() || 2 * tail >= w) {
      segs.push_back({full * w, n_samples});
    } else {
      segs.back().end = n_samples;
    }
  }
  for (auto& s : segs) {
    s.start = static_cast<double>(s.begin) / sample_rate;
    s.stop = static_cast<double>(s.end) / sample_rate;
  }
  return segs;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

double rms(const std::vector<float>& s, std::size_t begin, std::size_t end) {
  if (end <= begin) return 0.0;
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) acc += static_cast<double>(s[i]) * s[i];
  return std::sqrt(acc / static_cast<double>(end - begin));
}

}  // namespace

EnergyVad::EnergyVad(const AudioBuffer& audio, VadConfig config)
    : audio_(&audio), config_(config) {
  if (!(config_.frame_s > 0.0) || !(config_.hop_s > 0.0)) {
    throw ConfigError("VAD frame and hop must be positive");
  }
  frame_len_ = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(config_.frame_s * audio.sample_rate)));
  hop_ = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(config_.hop_s * audio.sample_rate)));
  const std::size_t n = audio.samples.size();
  if (n > 0 && n < frame_len_) {
    rms_.push_back(rms(audio.samples, 0, n));
  }
  for (std::size_t b = 0; b + frame_len_ <= n; b += hop_) {
    rms_.push_back(rms(audio.samples, b, b + frame_len_));
  }
  threshold_ = std::max(config_.abs_floor,
                        config_.rel_fraction * percentile(rms_, config_.percentile));
}

bool EnergyVad::is_speech(const Segment& seg) const {
  const std::size_t end = std::min(seg.end, audio_->samples.size());
  std::size_t total = 0, active = 0;
  const std::size_t first = (seg.begin + hop_ - 1) / hop_;
  for (std::size_t f = first; f < rms_.size(); ++f) {
    const std::size_t b = f * hop_;
    if (b + frame_len_ > end) break;
    ++total;
    if (rms_[f] > threshold_) ++active;
  }
  if (total == 0) return rms(audio_->samples, seg.begin, end) > threshold_;
  return static_cast<double>(active) >= config_.min_active * static_cast<double>(total);
}

Method parse_method(const std::string& name) {
  if (name == "mixsae") return Method::kMixSae;
  if (name == "kmeans") return Method::kKMeans;
  if (name == "ahc") return Method::kAhc;
  throw ConfigError("unknown method '" + name + "' (expected mixsae, kmeans or ahc)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::kMixSae: return "mixsae";
    case Method::kKMeans: return "kmeans";
    case Method::kAhc: return "ahc";
  }
  return "?";
}

Precision parse_precision(const std::string& name) {
  if (name == "f32") return Precision::kFloat32;
  if (name == "f64") return Precision::kFloat64;
  throw ConfigError("unknown precision '" + name + "' (expected f32 or f64)");
}

namespace {

template <typename T>
void run_mix_sae(const Matrix<double>& data, const PipelineOptions& options,
                 ClusterOutcome& out, std::optional<MixSae<T>>& slot) {
  MixSaeConfig config = options.mix;
  config.k = options.k;
  config.input_dim = data.cols();
  MixSae<T> model(config, options.seed);
  const Matrix<T> x = data.cast<T>();
  PretrainReport report = pretrain(model, x, options.seed);
  out.pretrain_labels = report.pseudo.labels;
  PseudoLabelState pseudo = report.pseudo;
  out.main_log = main_train(model, x, pseudo, options.seed);
  out.labels = model.infer_labels(x);
  out.pretrain = std::move(report);
  slot = std::move(model);
}

}  // namespace

ClusterOutcome cluster_embeddings(const Matrix<double>& data, const PipelineOptions& options) {
  if (options.k == 0) throw ConfigError("k must be positive");
  if (options.method == Method::kMixSae && options.k < 2) {
    throw ConfigError("mixsae needs k >= 2");
  }
  if (data.rows() < options.k) {
    throw DataError("cannot form " + std::to_string(options.k) + " clusters from " +
                    std::to_string(data.rows()) + " embeddings");
  }
  if (!data.all_finite()) throw DataError("embeddings contain non-finite values");
  ClusterOutcome out;
  switch (options.method) {
    case Method::kMixSae:
      if (options.precision == Precision::kFloat32) {
        run_mix_sae<float>(data, options, out, out.model_f32);
      } else {
        run_mix_sae<double>(data, options, out, out.model_f64);
      }
      break;
    case Method::kKMeans:
      out.labels = kmeans_fit_restarts(data, options.k, options.seed, options.kmeans_restarts).labels;
      break;
    case Method::kAhc: {
      AhcConfig cfg = options.ahc;
      cfg.target_clusters = options.k;
      out.labels = ahc_fit(data, cfg);
      break;
    }
  }
  return out;
}

Annotation DiarizationResult::to_annotation() const {
  Annotation a;
  a.recording_id = recording_id;
  for (const auto& t : turns) a.turns.push_back({t.start, t.end, "spk" + std::to_string(t.speaker)});
  return a;
}

DiarizationResult assemble_diarization(const std::vector<SegmentTiming>& timings,
                                       const std::vector<std::size_t>& labels,
                                       const std::string& recording_id) {
  if (timings.size() != labels.size()) {
    throw DataError("label count " + std::to_string(labels.size()) + " does not match " +
                    std::to_string(timings.size()) + " segments");
  }
  const auto relabeled = relabel_by_first_appearance(labels);
  DiarizationResult r;
  r.recording_id = recording_id;
  constexpr double kGap = 1e-9;
  for (std::size_t i = 0; i < timings.size(); ++i) {
    const auto& t = timings[i];
    if (!r.turns.empty() && r.turns.back().speaker == relabeled[i] &&
        t.start - r.turns.back().end <= kGap) {
      r.turns.back().end = std::max(r.turns.back().end, t.end);
    } else {
      r.turns.push_back({t.start, t.end, relabeled[i]});
    }
  }
  return r;
}

DiarizationResult run_pipeline(const EmbeddingSet& set, const PipelineOptions& options,
                               ClusterOutcome* outcome) {
  if (!set.has_timings()) {
    throw DataError("embedding set '" + set.recording_id + "' has no segment timings");
  }
  set.validate();
  ClusterOutcome res = cluster_embeddings(set.as_matrix<double>(), options);
  DiarizationResult d = assemble_diarization(set.timings, res.labels, set.recording_id);
  if (outcome) *outcome = std::move(res);
  return d;
}

}  // namespace sdiar
