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

// Diarization error rate with a reference-boundary collar and an optimal
// one-to-one speaker mapping.
//
// The timeline is cut at every turn boundary and collar edge. Pieces lying
// within +-collar of a reference boundary are not scored. On each scored
// piece with n_ref reference and n_hyp hypothesis speakers:
//   MS += d * max(0, n_ref - n_hyp)
//   FA += d * max(0, n_hyp - n_ref)
//   CE += d * (min(n_ref, n_hyp) - n_correct)
// and the denominator accumulates d * n_ref.

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sdiar/annotation.hpp"

namespace sdiar {

struct DerReport {
  std::string recording_id;
  double fa = 0.0;
  double ms = 0.0;
  double ce = 0.0;
  double scored_total = 0.0;
  double der = 0.0;
  double collar = 0.0;
  /// hypothesis speaker -> reference speaker
  std::vector<std::pair<std::string, std::string>> speaker_map;
};

/// Mapping that maximises scored overlap between hypothesis and reference speakers.
std::vector<std::pair<std::string, std::string>> optimal_speaker_mapping(
    const Annotation& ref, const Annotation& hyp, double collar = 0.0);

/// Throws DataError for an empty reference or when the collar leaves no
/// reference speech to score. `strict` rejects overlapped references.
DerReport der(const Annotation& ref, const Annotation& hyp, double collar = 0.0,
              bool strict = false);

/// Unweighted mean of per-recording DER.
double mean_der(std::span<const DerReport> reports);

/// Fixed-width table with one row per recording and a mean row.
void print_der_table(std::ostream& out, std::span<const DerReport> reports);
/// `recording_id,fa,ms,ce,total,der,collar` rows with a header.
void write_der_csv(std::ostream& out, std::span<const DerReport> reports);

}  // namespace sdiar
