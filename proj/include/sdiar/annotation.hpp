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

// Timed speaker turns and their text formats (RTTM and start,end,speaker CSV).

#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace sdiar {

struct Turn {
  double start = 0.0;
  double end = 0.0;
  std::string speaker;

  double duration() const noexcept { return end - start; }
};

/// A reference or hypothesis labelling of one recording.
struct Annotation {
  std::string recording_id;
  std::vector<Turn> turns;

  /// Throws DataError on non-positive durations or same-speaker overlap.
  /// With `strict`, overlap between different speakers is rejected too.
  void validate(bool strict = false) const;
  bool has_cross_speaker_overlap() const;
  std::vector<std::string> speakers() const;
};

/// Writes `SPEAKER <rec> 1 <start> <dur> <NA> <NA> <speaker> <NA> <NA>` lines, 3 decimals.
void write_rttm(std::ostream& out, const Annotation& a);
void write_rttm(const std::string& path, const Annotation& a);

/// RTTM parsing grouped by recording id; non-SPEAKER lines are ignored.
std::map<std::string, Annotation> read_rttm(std::istream& in);
std::map<std::string, Annotation> read_rttm_file(const std::string& path);

/// CSV with `start,end,speaker` rows; an optional header line is skipped.
Annotation read_turn_csv(std::istream& in, const std::string& recording_id);
void write_turn_csv(std::ostream& out, const Annotation& a);

/// Dispatches on extension: `.rttm` or `.csv` (recording id = file stem).
std::map<std::string, Annotation> read_annotation_file(const std::string& path);

}  // namespace sdiar
