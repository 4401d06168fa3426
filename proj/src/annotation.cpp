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

#include "sdiar/annotation.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "sdiar/error.hpp"

namespace sdiar {

namespace {

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError(FormatError::Kind::kInvalid, ctx + ": cannot parse number '" + s + "'");
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

void Annotation::validate(bool strict) const {
  for (const auto& t : turns) {
    if (!(t.end > t.start)) {
      throw DataError(recording_id + ": turn [" + fixed3(t.start) + ", " + fixed3(t.end) +
                      ") has non-positive duration");
    }
  }
  std::map<std::string, std::vector<const Turn*>> by_speaker;
  for (const auto& t : turns) by_speaker[t.speaker].push_back(&t);
  for (auto& [spk, list] : by_speaker) {
    std::sort(list.begin(), list.end(), [](auto* a, auto* b) { return a->start < b->start; });
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (list[i]->start < list[i - 1]->end) {
        throw DataError(recording_id + ": overlapping turns for speaker " + spk);
      }
    }
  }
  if (strict && has_cross_speaker_overlap()) {
    throw DataError(recording_id + ": reference contains overlapped speech");
  }
}

bool Annotation::has_cross_speaker_overlap() const {
  for (std::size_t i = 0; i < turns.size(); ++i) {
    for (std::size_t j = i + 1; j < turns.size(); ++j) {
      const auto& a = turns[i];
      const auto& b = turns[j];
      if (a.speaker != b.speaker && a.start < b.end && b.start < a.end) return true;
    }
  }
  return false;
}

std::vector<std::string> Annotation::speakers() const {
  std::set<std::string> s;
  for (const auto& t : turns) s.insert(t.speaker);
  return {s.begin(), s.end()};
}

void write_rttm(std::ostream& out, const Annotation& a) {
  for (const auto& t : a.turns) {
    out << "SPEAKER " << a.recording_id << " 1 " << fixed3(t.start) << ' ' << fixed3(t.duration())
        << " <NA> <NA> " << t.speaker << " <NA> <NA>\n";
  }
}

void write_rttm(const std::string& path, const Annotation& a) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path + " for writing");
  write_rttm(out, a);
}

std::map<std::string, Annotation> read_rttm(std::istream& in) {
  std::map<std::string, Annotation> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty() || tok[0] != "SPEAKER") continue;
    const std::string ctx = "rttm line " + std::to_string(lineno);
    if (tok.size() < 8) throw FormatError(FormatError::Kind::kInvalid, ctx + ": too few fields");
    Turn t;
    t.start = parse_double(tok[3], ctx);
    t.end = t.start + parse_double(tok[4], ctx);
    t.speaker = tok[7];
    auto& ann = out[tok[1]];
    ann.recording_id = tok[1];
    ann.turns.push_back(std::move(t));
  }
  return out;
}

std::map<std::string, Annotation> read_rttm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_rttm(in);
}

Annotation read_turn_csv(std::istream& in, const std::string& recording_id) {
  Annotation a;
  a.recording_id = recording_id;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(trim(cell));
    const std::string ctx = "csv line " + std::to_string(lineno);
    if (f.size() != 3) throw FormatError(FormatError::Kind::kInvalid, ctx + ": expected start,end,speaker");
    if (lineno == 1 && f[0] == "start") continue;
    a.turns.push_back({parse_double(f[0], ctx), parse_double(f[1], ctx), f[2]});
  }
  return a;
}

void write_turn_csv(std::ostream& out, const Annotation& a) {
  out << "start,end,speaker\n";
  out.precision(17);
  for (const auto& t : a.turns) out << t.start << ',' << t.end << ',' << t.speaker << '\n';
}

std::map<std::string, Annotation> read_annotation_file(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.extension() == ".csv") {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    Annotation a = read_turn_csv(in, p.stem().string());
    return {{a.recording_id, std::move(a)}};
  }
  return read_rttm_file(path);
}

}  // namespace sdiar
