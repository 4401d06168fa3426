// Acceptance run: one PASS/FAIL line per criterion, detail lines indented.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "der_oracle.hpp"
#include "sdiar/clustering.hpp"
#include "sdiar/embedding_io.hpp"
#include "sdiar/metrics.hpp"
#include "sdiar/mix_sae.hpp"
#include "sdiar/nn.hpp"
#include "sdiar/oracle_suite.hpp"
#include "sdiar/pipeline.hpp"
#include "sdiar/sae.hpp"
#include "sdiar/synth.hpp"

using namespace sdiar;

namespace {

// Pinned tolerances.
constexpr double kGradTol = 1e-4;
constexpr std::size_t kGradSeeds = 10;
constexpr double kGradBudget = 60.0;
constexpr double kSimplexTol = 1e-12;
constexpr double kDerTimeline = 2e-3;
constexpr int kDerCases = 100;
constexpr double kDerBudget = 30.0;
constexpr double kKMeansMin = 0.99;
constexpr double kMixMin = 0.95;
constexpr double kMixSlack = 0.02;
constexpr int kClusterSeeds = 5;
constexpr double kClusterBudget = 300.0;
constexpr double kE2eDerMax = 0.10;
constexpr double kE2eGap = 0.05;
constexpr double kE2eBudget = 300.0;
constexpr double kStabilitySpread = 0.03;
constexpr double kConversationSilence = 0.2;

int failures = 0;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void detail(const std::string& s) {
  std::printf("      %s\n", s.c_str());
  std::fflush(stdout);
}

void gradient_oracles() {
  const auto t0 = Clock::now();
  OracleSuiteConfig cfg;
  cfg.seeds = kGradSeeds;
  cfg.tolerance = kGradTol;
  const auto results = run_gradient_oracles(cfg);
  const double secs = since(t0);
  const std::set<std::string> required{"L_MSE", "L_pen", "L_SAE", "L_rec", "L_ent", "L_main"};
  std::set<std::string> seen;
  bool ok = secs < kGradBudget;
  double worst = 0.0;
  for (const auto& r : results) {
    detail(fmt("%-22s max_rel_err %.3e over %zu seeds", r.name.c_str(), r.max_rel_error, r.seeds));
    seen.insert(r.name);
    worst = std::max(worst, r.max_rel_error);
    ok = ok && r.passed && r.seeds >= kGradSeeds && r.max_rel_error < kGradTol;
  }
  for (const auto& name : required) ok = ok && seen.count(name) == 1;
  report(ok, "gradient_oracles",
         fmt("max_rel_err %.3e (< %.0e), %zu seeds, %.2f s (< %.0f s)", worst, kGradTol,
             kGradSeeds, secs, kGradBudget));
}

void loss_identities() {
  bool ok = true;
  const std::vector<std::vector<double>> same{{0.2, 0.2, 0.2}, {0.2}};
  const double kl = kl_penalty(0.2, same);
  ok = ok && kl == 0.0;

  const double rec = weighted_reconstruction_loss(Matrix<double>{{1, 0}, {0, 1}, {0, 1}},
                                                  Matrix<double>{{0, 3}, {7, 0}, {1, 0}});
  ok = ok && rec == -1.0;

  // Uniform gate of a fresh model with zero-initialised output layer.
  bool ent_ok = true;
  for (std::size_t k : {2u, 4u, 8u}) {
    MixSaeConfig c;
    c.k = k;
    c.input_dim = 10;
    c.encoder_hidden = {6};
    MixSae<double> model(c, k);
    std::mt19937_64 rng(k);
    std::normal_distribution<double> nd;
    Matrix<double> x(25, 10);
    for (auto& v : x.flat()) v = nd(rng);
    std::vector<std::size_t> labels(25);
    for (std::size_t i = 0; i < 25; ++i) labels[i] = i % k;
    const double ent = pseudo_label_loss(model.gate_probabilities(x), labels);
    ent_ok = ent_ok && ent == std::log(static_cast<double>(k));
  }
  ok = ok && ent_ok;

  double worst_simplex = 0.0;
  for (std::size_t k = 2; k <= 8; ++k) {
    MixSaeConfig c;
    c.k = k;
    c.input_dim = 10;
    c.encoder_hidden = {6};
    c.gate_init = GateInit::kGlorot;
    c.gate_hidden = k % 2 == 0 ? 8 : 0;
    MixSae<double> model(c, 100 + k);
    std::mt19937_64 rng(k);
    std::normal_distribution<double> nd(0.0, 5.0);
    Matrix<double> x(1000, 10);
    for (auto& v : x.flat()) v = nd(rng);
    const Matrix<double> p = model.gate_probabilities(x);
    for (std::size_t i = 0; i < p.rows(); ++i) {
      double s = 0.0;
      for (double v : p.row(i)) {
        ok = ok && v >= 0.0;
        s += v;
      }
      worst_simplex = std::max(worst_simplex, std::abs(s - 1.0));
    }
  }
  ok = ok && worst_simplex <= kSimplexTol;
  report(ok, "loss_identities",
         fmt("KL(rho||rho)=%g, L_rec=%g, L_ent==ln k for k in {2,4,8}: %s, simplex err %.1e "
             "(<= %.0e)",
             kl, rec, ent_ok ? "yes" : "no", worst_simplex, kSimplexTol));
}

void der_oracle() {
  const auto t0 = Clock::now();
  bool ok = true;
  const Annotation ref{"rec", {{0, 10, "A"}, {10, 20, "B"}}};
  const double half = der(ref, Annotation{"rec", {{0, 20, "x"}}}).der;
  const double ident = der(ref, Annotation{"rec", {{0, 10, "p"}, {10, 20, "q"}}}).der;
  const double empty = der(ref, Annotation{"rec", {}}).der;
  ok = ok && std::abs(half - 0.5) < 1e-12 && ident == 0.0 && std::abs(empty - 1.0) < 1e-12;

  std::mt19937_64 rng(2024);
  double worst = 0.0;
  int compared = 0;
  for (int i = 0; i < kDerCases; ++i) {
    auto [r, h] = test::random_der_case(rng);
    const DerReport got = der(r, h, 0.0);
    const test::OracleDer want = test::brute_force_der(r, h, 0.0);
    for (double e : {got.fa - want.fa, got.ms - want.ms, got.ce - want.ce,
                     got.scored_total - want.total}) {
      worst = std::max(worst, std::abs(e));
    }
    ++compared;
  }
  const double secs = since(t0);
  ok = ok && worst <= kDerTimeline && compared == kDerCases && secs < kDerBudget;
  report(ok, "der_oracle",
         fmt("fixtures 50%%/0%%/100%% -> %.2f%%/%.2f%%/%.2f%%, %d random cases max |err| %.1e s "
             "(<= %.0e), %.2f s (< %.0f s)",
             100 * half, 100 * ident, 100 * empty, compared, worst, kDerTimeline, secs, kDerBudget));
}

struct ClusterRun {
  std::vector<std::size_t> labels;
  std::vector<std::size_t> pretrain_labels;
};

ClusterRun mix_sae_run(const Matrix<double>& x, std::uint64_t seed) {
  PipelineOptions o;
  o.seed = seed;
  ClusterOutcome out = cluster_embeddings(x, o);
  return {out.labels, out.pretrain_labels};
}

void synthetic_clustering_and_determinism() {
  const auto t0 = Clock::now();
  bool ok = true;
  double worst_km = 1.0, worst_mix = 1.0, worst_margin = 1.0;
  ClusterRun first;
  Matrix<double> first_x;
  for (int s = 1; s <= kClusterSeeds; ++s) {
    SynthSpec spec;
    spec.seed = static_cast<std::uint64_t>(s);
    const SynthEmbeddings data = synth_embeddings(spec);
    const Matrix<double> x = data.set.as_matrix<double>();
    const KMeansResult km = kmeans_fit(x, 2, spec.seed);
    const double acc_km = clustering_accuracy(km.labels, data.labels);
    const ClusterRun run = mix_sae_run(x, spec.seed);
    const double acc_pre = clustering_accuracy(run.pretrain_labels, data.labels);
    const double acc_mix = clustering_accuracy(run.labels, data.labels);
    detail(fmt("seed %d: k-means++ %.4f, Mix-SAE pretrain %.4f, final %.4f", s, acc_km, acc_pre,
               acc_mix));
    worst_km = std::min(worst_km, acc_km);
    worst_mix = std::min(worst_mix, acc_mix);
    worst_margin = std::min(worst_margin, acc_mix - (acc_pre - kMixSlack));
    ok = ok && acc_km >= kKMeansMin && acc_mix >= kMixMin && acc_mix >= acc_pre - kMixSlack;
    if (s == 1) {
      first = run;
      first_x = x;
    }
  }
  const double secs = since(t0);
  ok = ok && secs < kClusterBudget;
  report(ok, "synthetic_clustering",
         fmt("min k-means++ acc %.4f (>= %.2f), min Mix-SAE acc %.4f (>= %.2f), min margin over "
             "pretrain-%.2f %+.4f, %d seeds, %.1f s (< %.0f s)",
             worst_km, kKMeansMin, worst_mix, kMixMin, kMixSlack, worst_margin, kClusterSeeds, secs,
             kClusterBudget));

  // Determinism and persistence.
  const ClusterRun again = mix_sae_run(first_x, 1);
  const bool labels_same = again.labels == first.labels &&
                           again.pretrain_labels == first.pretrain_labels;

  PipelineOptions o;
  o.seed = 1;
  ClusterOutcome out = cluster_embeddings(first_x, o);
  const MixSae<float>& model = *out.model_f32;
  std::stringstream a;
  save_checkpoint(model, a);
  const std::string bytes = a.str();
  std::istringstream in(bytes);
  const MixSae<float> loaded = load_checkpoint<float>(in);
  std::stringstream b;
  save_checkpoint(loaded, b);
  const Matrix<float> xf = first_x.cast<float>();
  const bool ckpt_same = b.str() == bytes &&
                         loaded.gate_probabilities(xf) == model.gate_probabilities(xf) &&
                         loaded.reconstruction_errors(xf) == model.reconstruction_errors(xf) &&
                         loaded.infer_labels(xf) == out.labels;

  SynthSpec spec;
  spec.seed = 1;
  const SynthConversation conv = synth_conversation(spec, 0.2);
  std::stringstream sa;
  write_embeddings(conv.set, sa);
  std::istringstream sin(sa.str());
  const EmbeddingSet back = read_embeddings(sin);
  std::stringstream sb;
  write_embeddings(back, sb);
  const bool sdeb_same = back == conv.set && sb.str() == sa.str();

  report(labels_same && ckpt_same && sdeb_same, "determinism_persistence",
         fmt("same-seed labels identical: %s, checkpoint roundtrip bit-exact: %s (%zu bytes), "
             "SDEB roundtrip bit-exact: %s (%zu bytes)",
             labels_same ? "yes" : "no", ckpt_same ? "yes" : "no", bytes.size(),
             sdeb_same ? "yes" : "no", sa.str().size()));
}

struct ConversationRun {
  double der_mix = 0.0;
  double der_km = 0.0;
  double accuracy = 0.0;
  double secs = 0.0;
};

ConversationRun conversation_run(std::uint64_t seed, double w) {
  SynthSpec spec;
  spec.seed = seed;
  spec.turns.silence_prob = kConversationSilence;
  const SynthConversation conv = synth_conversation(spec, w);
  const auto t0 = Clock::now();
  PipelineOptions mix;
  mix.seed = seed;
  ClusterOutcome out;
  const DiarizationResult hyp = run_pipeline(conv.set, mix, &out);
  PipelineOptions km = mix;
  km.method = Method::kKMeans;
  const DiarizationResult base = run_pipeline(conv.set, km);
  ConversationRun r;
  r.secs = since(t0);
  r.der_mix = der(conv.reference, hyp.to_annotation(), 0.0).der;
  r.der_km = der(conv.reference, base.to_annotation(), 0.0).der;
  r.accuracy = clustering_accuracy(out.labels, conv.labels);
  detail(fmt("seed %llu W=%.1f: %zu windows, Mix-SAE DER %.2f%%, k-means DER %.2f%%, window "
             "accuracy %.4f, %.1f s",
             static_cast<unsigned long long>(seed), w, conv.set.n(), 100 * r.der_mix,
             100 * r.der_km, r.accuracy, r.secs));
  return r;
}

void end_to_end_and_stability() {
  const std::vector<double> grid{0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<std::vector<ConversationRun>> runs;
  for (std::uint64_t seed : {1u, 2u}) {
    runs.emplace_back();
    for (double w : grid) runs.back().push_back(conversation_run(seed, w));
  }

  const ConversationRun& a = runs[0].front();
  const ConversationRun& b = runs[0].back();
  const double secs = a.secs + b.secs;
  const double worst_der = std::max(a.der_mix, b.der_mix);
  const double worst_gap =
      std::max(std::abs(a.der_km - a.der_mix), std::abs(b.der_km - b.der_mix));
  report(worst_der <= kE2eDerMax && worst_gap <= kE2eGap && secs < kE2eBudget, "end_to_end",
         fmt("3 min conversation seed 1, W=0.2/1.0: Mix-SAE DER %.2f%%/%.2f%% (<= %.0f%%), "
             "k-means gap %.2f points (<= %.0f), %.1f s (< %.0f s)",
             100 * a.der_mix, 100 * b.der_mix, 100 * kE2eDerMax, 100 * worst_gap, 100 * kE2eGap,
             secs, kE2eBudget));

  double worst_spread = 0.0;
  for (const auto& per_seed : runs) {
    double lo = 1.0, hi = 0.0;
    for (const auto& r : per_seed) {
      lo = std::min(lo, r.accuracy);
      hi = std::max(hi, r.accuracy);
    }
    worst_spread = std::max(worst_spread, hi - lo);
  }
  report(worst_spread <= kStabilitySpread, "stability_across_w",
         fmt("Mix-SAE accuracy spread over W in {0.2..1.0}: %.2f points (<= %.0f), seeds 1-2",
             100 * worst_spread, 100 * kStabilitySpread));
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  gradient_oracles();
  loss_identities();
  der_oracle();
  synthetic_clustering_and_determinism();
  end_to_end_and_stability();
  std::printf("%d criteria failed, %.1f s total\n", failures, since(t0));
  return failures;
}
