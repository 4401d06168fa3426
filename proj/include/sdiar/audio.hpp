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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sdiar {

inline constexpr int kPipelineSampleRate = 16000;

/// Mono samples in [-1, 1].
struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate = kPipelineSampleRate;

  double duration() const noexcept {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

/// Reads 16-bit PCM or 32-bit float WAV, averages channels to mono and
/// resamples to `target_rate` by linear interpolation.
AudioBuffer read_wav(const std::string& path, int target_rate = kPipelineSampleRate);

enum class WavEncoding { kPcm16, kFloat32 };
void write_wav(const std::string& path, const AudioBuffer& audio,
               WavEncoding encoding = WavEncoding::kPcm16);

/// Linear-interpolation resampling.
AudioBuffer resample_linear(const AudioBuffer& in, int target_rate);

}  // namespace sdiar
