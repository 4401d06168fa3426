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

#include "sdiar/embedding_io.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <utility>

#include "binary_io.hpp"
#include "sdiar/error.hpp"

namespace sdiar {

namespace {

constexpr char kMagic[4] = {'S', 'D', 'E', 'B'};
constexpr std::uint8_t kVersion = 0x01;
constexpr std::uint8_t kFlagTimings = 0x01;

constexpr std::array<std::pair<std::string_view, std::size_t>, 5> kWhisperDims{{
    {"tiny", 384},
    {"base", 512},
    {"small", 768},
    {"medium", 1024},
    {"large", 1280},
}};

}  // namespace

std::optional<std::size_t> whisper_embedding_dim(std::string_view version) {
  for (const auto& [name, dim] : kWhisperDims) {
    if (name == version) return dim;
  }
  return std::nullopt;
}

void EmbeddingSet::validate() const {
  if (has_timings()) {
    if (timings.size() != n()) {
      throw DataError("embedding set has " + std::to_string(timings.size()) + " timings for " +
                      std::to_string(n()) + " vectors");
    }
    for (std::size_t i = 0; i < timings.size(); ++i) {
      if (!(timings[i].end > timings[i].start)) throw DataError("segment timing with non-positive length");
      if (i > 0 && timings[i].start < timings[i - 1].end) {
        throw DataError("segment timings must be sorted and non-overlapping");
      }
    }
  }
  constexpr std::string_view prefix = "whisper-";
  if (source_tag.starts_with(prefix)) {
    const auto version = std::string_view(source_tag).substr(prefix.size());
    const auto expected = whisper_embedding_dim(version);
    if (!expected) throw DataError("unknown Whisper version in source tag '" + source_tag + "'");
    if (*expected != dim()) {
      throw DataError("Whisper " + std::string(version) + " embeddings have dim " +
                      std::to_string(*expected) + ", file declares " + std::to_string(dim()));
    }
  }
}

void write_embeddings(const EmbeddingSet& set, std::ostream& out) {
  set.validate();
  out.write(kMagic, 4);
  binio::put_u8(out, kVersion);
  binio::put_u8(out, set.has_timings() ? kFlagTimings : 0);
  binio::put_u32(out, static_cast<std::uint32_t>(set.dim()));
  binio::put_u64(out, static_cast<std::uint64_t>(set.n()));
  binio::put_string(out, set.recording_id);
  binio::put_string(out, set.source_tag);
  for (float v : set.vectors.flat()) binio::put_f32(out, v);
  for (const auto& t : set.timings) {
    binio::put_f64(out, t.start);
    binio::put_f64(out, t.end);
  }
  if (!out) throw DataError("embedding write failed");
}

void write_embeddings(const EmbeddingSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for writing");
  write_embeddings(set, out);
}

EmbeddingSet read_embeddings(std::istream& in) {
  binio::Reader r(in, "SDEB");
  char magic[4];
  r.bytes(magic, 4);
  if (!std::equal(magic, magic + 4, kMagic)) {
    throw FormatError(FormatError::Kind::kBadMagic, "SDEB: bad magic");
  }
  const std::uint8_t version = r.u8();
  if (version != kVersion) {
    throw FormatError(FormatError::Kind::kUnknownVersion,
                      "SDEB: unknown version " + std::to_string(version));
  }
  const std::uint8_t flags = r.u8();
  if (flags & ~kFlagTimings) throw FormatError(FormatError::Kind::kInvalid, "SDEB: unknown flag bits");
  const std::uint32_t dim = r.u32();
  const std::uint64_t n = r.u64();
  EmbeddingSet set;
  set.recording_id = r.string();
  set.source_tag = r.string();

  // Read row by row so a lying header cannot force a huge allocation up front.
  std::vector<float> data;
  for (std::uint64_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < dim; ++j) data.push_back(r.f32());
  }
  set.vectors = Matrix<float>(n, dim, std::move(data));
  if (flags & kFlagTimings) {
    set.timings.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      SegmentTiming t;
      t.start = r.f64();
      t.end = r.f64();
      set.timings.push_back(t);
    }
  }
  if (!r.at_end()) throw FormatError(FormatError::Kind::kInvalid, "SDEB: trailing bytes");
  try {
    set.validate();
  } catch (const DataError& e) {
    throw FormatError(FormatError::Kind::kInvalid, std::string("SDEB: ") + e.what());
  }
  return set;
}

EmbeddingSet read_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return read_embeddings(in);
}

}  // namespace sdiar
