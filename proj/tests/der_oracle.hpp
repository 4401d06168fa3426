// Brute-force DER: 1 ms cells, every speaker mapping tried.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "sdiar/annotation.hpp"

namespace sdiar::test {

struct OracleDer {
  double fa = 0.0, ms = 0.0, ce = 0.0, total = 0.0;
  double der() const { return (fa + ms + ce) / total; }
};

inline OracleDer brute_force_der(const Annotation& ref, const Annotation& hyp, double collar) {
  const auto rs = ref.speakers();
  const auto hs = hyp.speakers();
  double end = 0.0;
  std::vector<double> bounds;
  for (const auto& t : ref.turns) {
    end = std::max(end, t.end);
    bounds.push_back(t.start);
    bounds.push_back(t.end);
  }
  for (const auto& t : hyp.turns) end = std::max(end, t.end);
  const std::size_t cells = static_cast<std::size_t>(std::ceil(end * 1000.0)) + 1;

  auto index_of = [](const std::vector<std::string>& names, const std::string& s) {
    return static_cast<std::size_t>(std::find(names.begin(), names.end(), s) - names.begin());
  };
  // Per cell: active reference and hypothesis speaker bitmasks.
  std::vector<unsigned> rmask(cells, 0), hmask(cells, 0);
  std::vector<bool> scored(cells, true);
  for (std::size_t c = 0; c < cells; ++c) {
    const double t = (static_cast<double>(c) + 0.5) / 1000.0;
    for (const auto& turn : ref.turns) {
      if (turn.start <= t && t < turn.end) rmask[c] |= 1u << index_of(rs, turn.speaker);
    }
    for (const auto& turn : hyp.turns) {
      if (turn.start <= t && t < turn.end) hmask[c] |= 1u << index_of(hs, turn.speaker);
    }
    for (double b : bounds) {
      if (std::abs(t - b) < collar) scored[c] = false;
    }
  }

  const std::size_t slots = std::max(rs.size(), hs.size());
  std::vector<std::size_t> perm(slots);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  OracleDer best;
  double best_err = std::numeric_limits<double>::infinity();
  do {
    // Hypothesis speaker h maps to reference speaker perm[h] when that exists.
    OracleDer o;
    for (std::size_t c = 0; c < cells; ++c) {
      if (!scored[c]) continue;
      const int nr = std::popcount(rmask[c]);
      const int nh = std::popcount(hmask[c]);
      int correct = 0;
      for (std::size_t h = 0; h < hs.size(); ++h) {
        if ((hmask[c] >> h & 1u) && perm[h] < rs.size() && (rmask[c] >> perm[h] & 1u)) ++correct;
      }
      o.total += nr;
      o.ms += std::max(0, nr - nh);
      o.fa += std::max(0, nh - nr);
      o.ce += std::min(nr, nh) - correct;
    }
    const double err = o.fa + o.ms + o.ce;
    if (err < best_err) {
      best_err = err;
      best = o;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  best.fa /= 1000.0;
  best.ms /= 1000.0;
  best.ce /= 1000.0;
  best.total /= 1000.0;
  return best;
}

/// Up to 4 speakers and 8 turns per side on a 10 ms grid. The reference has
/// no overlap; the hypothesis may overlap across speakers.
inline std::pair<Annotation, Annotation> random_der_case(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nspk(1, 4), nturn(1, 8), len(10, 400), gap(0, 150);
  auto grid = [](int ticks) { return ticks / 100.0; };
  Annotation ref{"rec", {}};
  const int rspk = nspk(rng);
  int cursor = gap(rng);
  for (int i = 0, n = nturn(rng); i < n; ++i) {
    const int a = cursor, b = a + len(rng);
    ref.turns.push_back({grid(a), grid(b), "R" + std::to_string(rng() % rspk)});
    cursor = b + (rng() % 3 == 0 ? 0 : gap(rng));
  }
  Annotation hyp{"rec", {}};
  const int hspk = nspk(rng);
  std::uniform_int_distribution<int> pos(0, cursor + 100);
  for (int i = 0, n = nturn(rng), tries = 0; i < n && tries < 200; ++tries) {
    const int a = pos(rng), b = a + len(rng);
    const std::string s = "H" + std::to_string(rng() % hspk);
    bool clash = false;
    for (const auto& t : hyp.turns) {
      if (t.speaker == s && grid(a) < t.end && t.start < grid(b)) clash = true;
    }
    if (clash) continue;
    hyp.turns.push_back({grid(a), grid(b), s});
    ++i;
  }
  std::sort(hyp.turns.begin(), hyp.turns.end(),
            [](const Turn& x, const Turn& y) { return x.start < y.start; });
  return {ref, hyp};
}

}  // namespace sdiar::test
