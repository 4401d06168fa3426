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

// Embedding sets and the SDEB container shared with the extractor.
//
// SDEB layout, all integers and reals little-endian:
//   offset 0  "SDEB"            magic
//          4  u8                version (0x01)
//          5  u8                flags, bit0 = timings present
//          6  u32               dim
//         10  u64               n
//         18  u32 + bytes       recording_id (UTF-8, length-prefixed)
//             u32 + bytes       source_tag   (UTF-8, length-prefixed)
//             n * dim f32       vectors, row-major
//             n * 2 f64         (start, end) seconds, only if bit0 is set

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdiar/matrix.hpp"

namespace sdiar {

struct SegmentTiming {
  double start = 0.0;
  double end = 0.0;
  friend bool operator==(const SegmentTiming&, const SegmentTiming&) = default;
};

struct EmbeddingSet {
  Matrix<float> vectors;  // n x dim
  std::vector<SegmentTiming> timings;  // empty or one per row
  std::string recording_id;
  std::string source_tag;

  std::size_t n() const noexcept { return vectors.rows(); }
  std::size_t dim() const noexcept { return vectors.cols(); }
  bool has_timings() const noexcept { return !timings.empty(); }

  /// Throws DataError on a timing count mismatch, unsorted or overlapping
  /// timings, or a Whisper source whose dim does not match its version.
  void validate() const;

  template <typename T>
  Matrix<T> as_matrix() const {
    return vectors.template cast<T>();
  }

  friend bool operator==(const EmbeddingSet&, const EmbeddingSet&) = default;
};

/// Embedding width of a Whisper encoder version (tiny .. large), if known.
std::optional<std::size_t> whisper_embedding_dim(std::string_view version);

void write_embeddings(const EmbeddingSet& set, std::ostream& out);
void write_embeddings(const EmbeddingSet& set, const std::string& path);
/// Throws FormatError with kBadMagic, kUnknownVersion or kTruncated.
EmbeddingSet read_embeddings(std::istream& in);
EmbeddingSet read_embeddings(const std::string& path);

}  // namespace sdiar
