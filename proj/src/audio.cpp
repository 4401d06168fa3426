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

#include "sdiar/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "sdiar/error.hpp"

namespace sdiar {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

AudioBuffer resample_linear(const AudioBuffer& in, int target_rate) {
  if (target_rate <= 0 || in.sample_rate <= 0) throw ConfigError("sample rates must be positive");
  if (in.sample_rate == target_rate) return in;
  AudioBuffer out;
  out.sample_rate = target_rate;
  const std::size_t n = in.samples.size();
  if (n == 0) return out;
  const double ratio = static_cast<double>(in.sample_rate) / target_rate;
  const auto m = static_cast<std::size_t>(std::llround(static_cast<double>(n) / ratio));
  out.samples.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double pos = static_cast<double>(i) * ratio;
    const auto i0 = std::min(static_cast<std::size_t>(pos), n - 1);
    const std::size_t i1 = std::min(i0 + 1, n - 1);
    const double frac = pos - static_cast<double>(i0);
    out.samples[i] = static_cast<float>((1.0 - frac) * in.samples[i0] + frac * in.samples[i1]);
  }
  return out;
}

AudioBuffer read_wav(const std::string& path, int target_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  binio::Reader r(in, "WAV " + path);
  char tag[4];
  r.bytes(tag, 4);
  if (std::memcmp(tag, "RIFF", 4) != 0) throw FormatError(FormatError::Kind::kBadMagic, path + ": not a RIFF file");
  r.u32();
  r.bytes(tag, 4);
  if (std::memcmp(tag, "WAVE", 4) != 0) throw FormatError(FormatError::Kind::kBadMagic, path + ": not a WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::vector<char> payload;
  while (true) {
    if (r.at_end()) break;
    r.bytes(tag, 4);
    const std::uint32_t size = r.u32();
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError(FormatError::Kind::kInvalid, path + ": short fmt chunk");
      format = r.le<std::uint16_t>();
      channels = r.le<std::uint16_t>();
      rate = r.u32();
      r.u32();                  // byte rate
      r.le<std::uint16_t>();    // block align
      bits = r.le<std::uint16_t>();
      std::vector<char> rest(size - 16);
      if (!rest.empty()) r.bytes(rest.data(), rest.size());
      if (format == kFormatExtensible && rest.size() >= 10) {
        format = static_cast<std::uint16_t>(static_cast<unsigned char>(rest[8]) |
                                            (static_cast<unsigned char>(rest[9]) << 8));
      }
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      payload.resize(size);
      r.bytes(payload.data(), size);
    } else {
      std::vector<char> skip(size);
      if (size) r.bytes(skip.data(), size);
    }
    if (size % 2 == 1 && !r.at_end()) r.u8();
  }
  if (!have_fmt) throw FormatError(FormatError::Kind::kInvalid, path + ": missing fmt chunk");
  if (channels == 0 || rate == 0) throw FormatError(FormatError::Kind::kInvalid, path + ": bad fmt");
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32) {
    throw FormatError(FormatError::Kind::kInvalid,
                      path + ": only 16-bit PCM and 32-bit float WAV are supported");
  }
  const std::size_t width = bits / 8;
  const std::size_t frames = payload.size() / (width * channels);
  AudioBuffer audio;
  audio.sample_rate = static_cast<int>(rate);
  audio.samples.resize(frames);
  std::istringstream data(std::string(payload.begin(), payload.end()));
  binio::Reader pr(data, path);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      acc += pcm16 ? static_cast<std::int16_t>(pr.le<std::uint16_t>()) / 32768.0
                   : static_cast<double>(pr.f32());
    }
    audio.samples[i] = static_cast<float>(acc / channels);
  }
  return resample_linear(audio, target_rate);
}

void write_wav(const std::string& path, const AudioBuffer& audio, WavEncoding encoding) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  const bool pcm = encoding == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * (bits / 8));
  out.write("RIFF", 4);
  binio::put_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  binio::put_u32(out, 16);
  binio::put_le<std::uint16_t>(out, pcm ? kFormatPcm : kFormatFloat);
  binio::put_le<std::uint16_t>(out, 1);
  binio::put_u32(out, static_cast<std::uint32_t>(audio.sample_rate));
  binio::put_u32(out, static_cast<std::uint32_t>(audio.sample_rate) * (bits / 8));
  binio::put_le<std::uint16_t>(out, bits / 8);
  binio::put_le<std::uint16_t>(out, bits);
  out.write("data", 4);
  binio::put_u32(out, data_bytes);
  for (float s : audio.samples) {
    if (pcm) {
      const double c = std::clamp(static_cast<double>(s), -1.0, 1.0);
      binio::put_le<std::uint16_t>(
          out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(c * 32767.0))));
    } else {
      binio::put_f32(out, s);
    }
  }
}

}  // namespace sdiar
