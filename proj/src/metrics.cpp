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

#include "sdiar/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "sdiar/assignment.hpp"
#include "sdiar/error.hpp"
#include "sdiar/matrix.hpp"

namespace sdiar {

namespace {

struct Piece {
  double duration;
  std::vector<std::size_t> ref;  // indices into ref speaker list
  std::vector<std::size_t> hyp;
};

struct Timeline {
  std::vector<std::string> ref_speakers;
  std::vector<std::string> hyp_speakers;
  std::vector<Piece> scored;
};

std::vector<std::size_t> active_at(const Annotation& a, const std::vector<std::string>& names,
                                   double t) {
  std::vector<std::size_t> out;
  for (const auto& turn : a.turns) {
    if (turn.start <= t && t < turn.end) {
      const auto idx = static_cast<std::size_t>(
          std::lower_bound(names.begin(), names.end(), turn.speaker) - names.begin());
      if (std::find(out.begin(), out.end(), idx) == out.end()) out.push_back(idx);
    }
  }
  return out;
}

Timeline build_timeline(const Annotation& ref, const Annotation& hyp, double collar) {
  if (collar < 0.0) throw ConfigError("collar must be non-negative");
  Timeline tl;
  tl.ref_speakers = ref.speakers();
  tl.hyp_speakers = hyp.speakers();

  std::vector<double> ref_bounds;
  for (const auto& t : ref.turns) {
    ref_bounds.push_back(t.start);
    ref_bounds.push_back(t.end);
  }
  std::vector<double> cuts;
  for (double b : ref_bounds) {
    cuts.push_back(b);
    if (collar > 0.0) {
      cuts.push_back(b - collar);
      cuts.push_back(b + collar);
    }
  }
  for (const auto& t : hyp.turns) {
    cuts.push_back(t.start);
    cuts.push_back(t.end);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    const double mid = 0.5 * (a + b);
    if (collar > 0.0) {
      const bool excluded = std::any_of(ref_bounds.begin(), ref_bounds.end(),
                                        [&](double rb) { return std::abs(mid - rb) < collar; });
      if (excluded) continue;
    }
    Piece p{b - a, active_at(ref, tl.ref_speakers, mid), active_at(hyp, tl.hyp_speakers, mid)};
    if (p.ref.empty() && p.hyp.empty()) continue;
    tl.scored.push_back(std::move(p));
  }
  return tl;
}

// mapping[h] = reference index or -1
std::vector<long> best_mapping(const Timeline& tl) {
  Matrix<double> overlap(tl.hyp_speakers.size(), tl.ref_speakers.size(), 0.0);
  for (const auto& p : tl.scored) {
    for (auto h : p.hyp) {
      for (auto r : p.ref) overlap(h, r) += p.duration;
    }
  }
  std::vector<long> map(tl.hyp_speakers.size(), -1);
  const auto match = max_weight_assignment(overlap);
  for (std::size_t h = 0; h < match.size(); ++h) {
    if (match[h]) map[h] = static_cast<long>(*match[h]);
  }
  return map;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> optimal_speaker_mapping(const Annotation& ref,
                                                                         const Annotation& hyp,
                                                                         double collar) {
  const Timeline tl = build_timeline(ref, hyp, collar);
  const auto map = best_mapping(tl);
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t h = 0; h < map.size(); ++h) {
    if (map[h] >= 0) out.emplace_back(tl.hyp_speakers[h], tl.ref_speakers[map[h]]);
  }
  return out;
}

DerReport der(const Annotation& ref, const Annotation& hyp, double collar, bool strict) {
  if (ref.turns.empty()) throw DataError("reference for " + ref.recording_id + " is empty");
  ref.validate(strict);
  const Timeline tl = build_timeline(ref, hyp, collar);
  const auto map = best_mapping(tl);

  DerReport r;
  r.recording_id = ref.recording_id;
  r.collar = collar;
  for (const auto& p : tl.scored) {
    const double nr = static_cast<double>(p.ref.size());
    const double nh = static_cast<double>(p.hyp.size());
    double correct = 0.0;
    for (auto h : p.hyp) {
      if (map[h] >= 0 && std::find(p.ref.begin(), p.ref.end(), static_cast<std::size_t>(map[h])) !=
                             p.ref.end()) {
        correct += 1.0;
      }
    }
    r.ms += p.duration * std::max(0.0, nr - nh);
    r.fa += p.duration * std::max(0.0, nh - nr);
    r.ce += p.duration * (std::min(nr, nh) - correct);
    r.scored_total += p.duration * nr;
  }
  if (!(r.scored_total > 0.0)) {
    throw DataError("no scored reference speech in " + ref.recording_id + " at collar " +
                    std::to_string(collar));
  }
  r.der = (r.fa + r.ms + r.ce) / r.scored_total;
  for (std::size_t h = 0; h < map.size(); ++h) {
    if (map[h] >= 0) r.speaker_map.emplace_back(tl.hyp_speakers[h], tl.ref_speakers[map[h]]);
  }
  return r;
}

double mean_der(std::span<const DerReport> reports) {
  if (reports.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& r : reports) acc += r.der;
  return acc / static_cast<double>(reports.size());
}

void print_der_table(std::ostream& out, std::span<const DerReport> reports) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-24s %10s %10s %10s %10s %8s\n", "recording", "FA(s)", "MS(s)",
                "CE(s)", "total(s)", "DER");
  out << buf;
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof(buf), "%-24s %10.3f %10.3f %10.3f %10.3f %7.2f%%\n",
                  r.recording_id.c_str(), r.fa, r.ms, r.ce, r.scored_total, 100.0 * r.der);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "%-24s %43s %7.2f%%\n", "MEAN", "", 100.0 * mean_der(reports));
  out << buf;
}

void write_der_csv(std::ostream& out, std::span<const DerReport> reports) {
  out << "recording_id,fa,ms,ce,total,der,collar\n";
  char buf[256];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.3f\n", r.recording_id.c_str(),
                  r.fa, r.ms, r.ce, r.scored_total, r.der, r.collar);
    out << buf;
  }
}

}  // namespace sdiar
