#include <cmath>

#include "doctest.h"
#include "sdiar/clustering.hpp"
#include "sdiar/error.hpp"
#include "sdiar/metrics.hpp"
#include "sdiar/pipeline.hpp"
#include "sdiar/synth.hpp"

using namespace sdiar;

TEST_CASE("centroids sit on a simplex with the requested edge") {
  for (std::size_t k : {2u, 3u, 5u}) {
    SynthSpec s;
    s.k = k;
    s.dim = 16;
    s.seed = k;
    const Matrix<double> c = synth_centroids(s);
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
        double d = 0.0;
        for (std::size_t j = 0; j < 16; ++j) d += (c(a, j) - c(b, j)) * (c(a, j) - c(b, j));
        CHECK(std::sqrt(d) == doctest::Approx(6.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("synthetic embeddings are deterministic and labelled in cluster order") {
  SynthSpec s;
  s.seed = 3;
  const auto a = synth_embeddings(s);
  const auto b = synth_embeddings(s);
  CHECK(a.set == b.set);
  REQUIRE(a.labels.size() == 400);
  CHECK(a.labels.front() == 0);
  CHECK(a.labels.back() == 1);
  s.seed = 4;
  CHECK_FALSE(synth_embeddings(s).set == a.set);

  SynthSpec bad;
  bad.dim = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("k-means accuracy tracks separation") {
  SynthSpec s;
  s.seed = 11;
  const auto easy = synth_embeddings(s);
  const auto km = kmeans_fit_restarts(easy.set.as_matrix<double>(), 2, 1, 10);
  CHECK(clustering_accuracy(km.labels, easy.labels) >= 0.99);

  s.separation = 0.0;
  const auto none = synth_embeddings(s);
  const auto chance = kmeans_fit_restarts(none.set.as_matrix<double>(), 2, 1, 10);
  CHECK(clustering_accuracy(chance.labels, none.labels) < 0.65);
}

TEST_CASE("two five-second turns at W = 1 give ten labelled embeddings") {
  const Annotation ref{"conv", {{0, 5, "S0"}, {5, 10, "S1"}}};
  SynthSpec s;
  const auto conv = synth_conversation_from_turns(ref, synth_centroids(s), 1.0, 7);
  REQUIRE(conv.set.n() == 10);
  CHECK(conv.labels == std::vector<std::size_t>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1});
  CHECK(conv.set.timings[4].end == doctest::Approx(5.0));

  const auto hyp = assemble_diarization(conv.set.timings, conv.labels, "conv");
  CHECK(der(ref, hyp.to_annotation()).der == 0.0);
}

TEST_CASE("windows mostly covered by silence are skipped") {
  const Annotation ref{"conv", {{0, 2, "S0"}, {3.6, 5, "S1"}}};
  SynthSpec s;
  const auto conv = synth_conversation_from_turns(ref, synth_centroids(s), 1.0, 1);
  // Windows [2,3) and [3,4) carry 0 s and 0.4 s of speech.
  REQUIRE(conv.set.n() == 3);
  CHECK(conv.set.timings[2].start == doctest::Approx(4.0));
}

TEST_CASE("generated turns are ordered, alternate and cover the duration") {
  SynthSpec s;
  s.seed = 5;
  s.turns.silence_prob = 0.3;
  const Annotation a = synth_turns(s);
  CHECK_NOTHROW(a.validate(true));
  REQUIRE(a.turns.size() > 10);
  for (std::size_t i = 1; i < a.turns.size(); ++i) {
    CHECK(a.turns[i].start >= a.turns[i - 1].end);
    CHECK(a.turns[i].speaker != a.turns[i - 1].speaker);
  }
  CHECK(a.turns.back().end <= s.duration_s + 1e-9);
  for (const auto& t : a.turns) {
    if (t.end < s.duration_s) CHECK(t.duration() >= s.turns.min_turn_s);
  }
}

TEST_CASE("oracle labels on a generated conversation score near zero") {
  SynthSpec s;
  s.seed = 6;
  s.duration_s = 60.0;
  const auto conv = synth_conversation(s, 0.2);
  const auto hyp = assemble_diarization(conv.set.timings, conv.labels, conv.reference.recording_id);
  // Only window quantisation at turn edges remains.
  CHECK(der(conv.reference, hyp.to_annotation()).der < 0.05);
}
