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

#include "cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdiar/annotation.hpp"
#include "sdiar/audio.hpp"
#include "sdiar/clustering.hpp"
#include "sdiar/embedding_io.hpp"
#include "sdiar/error.hpp"
#include "sdiar/metrics.hpp"
#include "sdiar/mix_sae.hpp"
#include "sdiar/oracle_suite.hpp"
#include "sdiar/pipeline.hpp"
#include "sdiar/synth.hpp"

namespace sdiar::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingCapability : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string default_out_dir() {
  const char* env = std::getenv("SDIAR_OUTPUT_DIR");
  return env && *env ? env : ".";
}

std::string format_w(double w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", w);
  return buf;
}

/// Replaces every "{w}" in `pattern`.
std::string expand_w(const std::string& pattern, double w) {
  std::string out = pattern;
  const std::string token = "{w}";
  for (auto pos = out.find(token); pos != std::string::npos; pos = out.find(token, pos)) {
    out.replace(pos, token.size(), format_w(w));
  }
  return out;
}

void validate_windows(const std::vector<double>& ws) {
  if (ws.empty()) throw UsageError("--w needs at least one value");
  for (double w : ws) {
    if (!(w > 0.0 && w <= 30.0)) throw UsageError("--w " + format_w(w) + " outside (0, 30]");
  }
}

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw DataError("cannot create output directory " + dir + ": " + ec.message());
  return p;
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

struct Logger {
  std::ostream& out;
  std::ostream& err;
  std::ofstream file;

  void info(const std::string& msg) {
    out << msg << '\n';
    if (file) file << msg << '\n';
  }
  void warn(const std::string& msg) {
    err << "warning: " << msg << '\n';
    if (file) file << "warning: " << msg << '\n';
  }
};

struct GlobalFlags {
  std::string out_dir = default_out_dir();
  std::string log_path;
};

struct ModelFlags {
  std::string method = "mixsae";
  std::size_t k = 2;
  std::uint64_t seed = 0;
  std::string precision = "f32";
  double rho = 0.2;
  double beta = 0.01;
  double alpha = 1.0;
  std::size_t tau = 10;
  std::size_t batch = 16;
  double lr = 1e-3;
  double wd = 5e-4;
  std::size_t pre_epochs = 50;
  std::size_t cluster_epochs = 20;
  std::size_t main_epochs = 20;
  std::vector<std::size_t> hidden{256, 128, 64, 32};
  std::size_t latent = 0;
  std::size_t gate_hidden = 0;
  std::string gate_init = "zero";
  std::string reduction = "sum";
  std::string optimizer = "adam";
  std::size_t kmeans_restarts = MixSaeConfig{}.kmeans_restarts;
  std::string linkage = "average";
  std::string metric = "cosine";

  void add_to(CLI::App* app) {
    app->add_option("--method", method, "Clustering method")
        ->check(CLI::IsMember({"mixsae", "kmeans", "ahc"}))
        ->capture_default_str();
    app->add_option("--k", k, "Number of clusters / speakers")->capture_default_str();
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
    app->add_option("--precision", precision, "Mix-SAE arithmetic")
        ->check(CLI::IsMember({"f32", "f64"}))
        ->capture_default_str();
    app->add_option("--rho", rho, "Sparsity target")->capture_default_str();
    app->add_option("--beta", beta, "Sparsity weight")->capture_default_str();
    app->add_option("--alpha", alpha, "Pseudo-label loss weight")->capture_default_str();
    app->add_option("--tau", tau, "Epochs between pseudo-label updates")->capture_default_str();
    app->add_option("--batch", batch, "Mini-batch size")->capture_default_str();
    app->add_option("--lr", lr, "Learning rate")->capture_default_str();
    app->add_option("--wd", wd, "Weight decay")->capture_default_str();
    app->add_option("--pre-epochs", pre_epochs, "Epochs for the pretraining autoencoder")
        ->capture_default_str();
    app->add_option("--per-cluster-epochs", cluster_epochs, "Epochs per cluster autoencoder")
        ->capture_default_str();
    app->add_option("--main-epochs", main_epochs, "Main-training epochs")->capture_default_str();
    app->add_option("--hidden", hidden, "Encoder widths")->delimiter(',')->capture_default_str();
    app->add_option("--latent", latent, "Latent width (0 = k)")->capture_default_str();
    app->add_option("--gate-hidden", gate_hidden, "Gate hidden width (0 = affine gate)")
        ->capture_default_str();
    app->add_option("--gate-init", gate_init, "Gate output initialisation")
        ->check(CLI::IsMember({"zero", "glorot"}))
        ->capture_default_str();
    app->add_option("--reduction", reduction, "Reconstruction error reduction")
        ->check(CLI::IsMember({"sum", "mean"}))
        ->capture_default_str();
    app->add_option("--optimizer", optimizer, "Optimizer")
        ->check(CLI::IsMember({"adam", "sgd"}))
        ->capture_default_str();
    app->add_option("--kmeans-restarts", kmeans_restarts, "k-Means++ runs, best inertia kept")
        ->capture_default_str();
    app->add_option("--linkage", linkage, "AHC linkage")
        ->check(CLI::IsMember({"average", "complete", "single"}))
        ->capture_default_str();
    app->add_option("--metric", metric, "AHC distance")
        ->check(CLI::IsMember({"cosine", "euclidean"}))
        ->capture_default_str();
  }

  PipelineOptions options() const {
    PipelineOptions o;
    o.method = parse_method(method);
    o.k = k;
    o.seed = seed;
    o.precision = parse_precision(precision);
    MixSaeConfig& m = o.mix;
    m.k = k;
    m.sparsity.rho = rho;
    m.sparsity.beta = beta;
    m.alpha = alpha;
    m.tau = tau;
    m.batch_size = batch;
    m.optimizer.learning_rate = lr;
    m.optimizer.weight_decay = wd;
    m.optimizer.kind = optimizer == "sgd" ? nn::OptimizerKind::kSgd : nn::OptimizerKind::kAdam;
    m.pretrain_epochs = pre_epochs;
    m.cluster_epochs = cluster_epochs;
    m.main_epochs = main_epochs;
    m.encoder_hidden = hidden;
    m.latent_dim = latent;
    m.gate_hidden = gate_hidden;
    m.gate_init = gate_init == "glorot" ? GateInit::kGlorot : GateInit::kZero;
    m.reduction = reduction == "mean" ? ReconReduction::kMean : ReconReduction::kSum;
    m.kmeans_restarts = kmeans_restarts;
    o.kmeans_restarts = kmeans_restarts;
    o.ahc.linkage = parse_linkage(linkage);
    o.ahc.metric = parse_metric(metric);
    o.ahc.target_clusters = k;
    return o;
  }

  Json echo() const {
    Json j;
    j["method"] = method;
    j["k"] = k;
    j["seed"] = seed;
    j["precision"] = precision;
    j["rho"] = rho;
    j["beta"] = beta;
    j["alpha"] = alpha;
    j["tau"] = tau;
    j["batch"] = batch;
    j["lr"] = lr;
    j["wd"] = wd;
    j["pre_epochs"] = pre_epochs;
    j["per_cluster_epochs"] = cluster_epochs;
    j["main_epochs"] = main_epochs;
    j["hidden"] = hidden;
    j["latent"] = latent == 0 ? k : latent;
    j["gate_hidden"] = gate_hidden;
    j["gate_init"] = gate_init;
    j["reduction"] = reduction;
    j["optimizer"] = optimizer;
    j["kmeans_restarts"] = kmeans_restarts;
    j["linkage"] = linkage;
    j["metric"] = metric;
    return j;
  }
};

void write_labels_csv(const fs::path& path, const std::vector<std::size_t>& labels,
                      const std::vector<SegmentTiming>& timings) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path.string());
  f << "index,start,end,label\n";
  char buf[96];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (timings.empty()) {
      std::snprintf(buf, sizeof buf, "%zu,,,%zu\n", i, labels[i]);
    } else {
      std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%zu\n", i, timings[i].start, timings[i].end,
                    labels[i]);
    }
    f << buf;
  }
}

/// Last column of every data row; a non-numeric first line is a header.
std::vector<std::size_t> read_label_column(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path);
  std::vector<std::size_t> labels;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string last = line.substr(line.rfind(',') + 1);
    try {
      std::size_t used = 0;
      const auto v = std::stoull(last, &used);
      if (used != last.size()) throw std::invalid_argument("trailing characters");
      labels.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      if (!first) throw DataError(path + ": bad label line '" + line + "'");
    }
    first = false;
  }
  return labels;
}

void write_annotation_csv(const fs::path& path, const Annotation& a) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path.string());
  write_turn_csv(f, a);
}

// ---------------------------------------------------------------- synth

struct SynthFlags {
  SynthSpec spec;
  std::optional<std::size_t> dim;
  bool conversation = false;
  std::vector<double> ws{1.0};
  std::string out;
  std::string ref_out;
  std::string id = "conversation";
};

int cmd_synth(const SynthFlags& f, const GlobalFlags& g, Logger& log) {
  if (!f.dim) throw UsageError("synth: --dim is required");
  SynthSpec spec = f.spec;
  spec.dim = *f.dim;
  spec.validate();
  const fs::path dir = ensure_dir(g.out_dir);
  Json echo;
  echo["command"] = "synth";
  echo["k"] = spec.k;
  echo["dim"] = spec.dim;
  echo["sep"] = spec.separation;
  echo["seed"] = spec.seed;

  if (!f.conversation) {
    echo["points"] = spec.points_per_cluster;
    const SynthEmbeddings s = synth_embeddings(spec);
    const fs::path out = f.out.empty() ? dir / "synth.sdeb" : fs::path(f.out);
    write_embeddings(s.set, out.string());
    fs::path labels = out;
    labels.replace_extension(".labels.csv");
    write_labels_csv(labels, s.labels, {});
    echo["out"] = out.string();
    echo["labels"] = labels.string();
    fs::path cfg = out;
    cfg.replace_extension(".config.json");
    write_json(cfg, echo);
    log.info("wrote " + out.string() + " (" + std::to_string(s.set.n()) + " x " +
             std::to_string(s.set.dim()) + ")");
    return kExitOk;
  }

  validate_windows(f.ws);
  echo["conversation"] = true;
  echo["duration"] = spec.duration_s;
  echo["mean_turn"] = spec.turns.mean_turn_s;
  echo["min_turn"] = spec.turns.min_turn_s;
  echo["silence_prob"] = spec.turns.silence_prob;
  echo["mean_silence"] = spec.turns.mean_silence_s;
  echo["w"] = f.ws;
  Annotation ref = synth_turns(spec);
  ref.recording_id = f.id;
  const Matrix<double> centroids = synth_centroids(spec);
  const fs::path ref_path = f.ref_out.empty() ? dir / (f.id + ".csv") : fs::path(f.ref_out);
  write_annotation_csv(ref_path, ref);
  echo["reference"] = ref_path.string();
  std::string pattern = f.out.empty() ? (dir / (f.id + "_w{w}.sdeb")).string() : f.out;
  if (f.ws.size() > 1 && pattern.find("{w}") == std::string::npos) {
    const fs::path p(pattern);
    pattern = (p.parent_path() / (p.stem().string() + "_w{w}" + p.extension().string())).string();
  }
  echo["out"] = pattern;
  for (double w : f.ws) {
    const SynthConversation conv = synth_conversation_from_turns(ref, centroids, w, spec.seed);
    const fs::path out(expand_w(pattern, w));
    write_embeddings(conv.set, out.string());
    fs::path labels = out;
    labels.replace_extension(".labels.csv");
    write_labels_csv(labels, conv.labels, conv.set.timings);
    log.info("wrote " + out.string() + " (" + std::to_string(conv.set.n()) + " windows, W=" +
             format_w(w) + ")");
  }
  write_json(dir / (f.id + ".config.json"), echo);
  log.info("wrote " + ref_path.string() + " (" + std::to_string(ref.turns.size()) + " turns)");
  return kExitOk;
}

// -------------------------------------------------------------- cluster

struct ClusterFlags {
  std::string embeddings;
  std::string truth;
  ModelFlags model;
};

int cmd_cluster(const ClusterFlags& f, const GlobalFlags& g, Logger& log) {
  const EmbeddingSet set = read_embeddings(f.embeddings);
  set.validate();
  const PipelineOptions opts = f.model.options();
  const fs::path dir = ensure_dir(g.out_dir);
  Json echo;
  echo["command"] = "cluster";
  echo["embeddings"] = f.embeddings;
  echo["n"] = set.n();
  echo["dim"] = set.dim();
  echo.update(f.model.echo());
  write_json(dir / "cluster_config.json", echo);

  const ClusterOutcome res = cluster_embeddings(set.as_matrix<double>(), opts);
  write_labels_csv(dir / "labels.csv", res.labels, set.timings);
  if (res.pretrain) {
    write_training_log((dir / "pretrain_log.csv").string(), res.pretrain->main_log);
    for (std::size_t c = 0; c < res.pretrain->cluster_logs.size(); ++c) {
      write_training_log((dir / ("cluster_" + std::to_string(c) + "_log.csv")).string(),
                         res.pretrain->cluster_logs[c]);
    }
    write_main_log((dir / "main_log.csv").string(), res.main_log);
    for (const auto& w : res.pretrain->warnings) log.warn(w);
  }
  if (res.model_f32) save_checkpoint(*res.model_f32, (dir / "model.ckpt").string());
  if (res.model_f64) save_checkpoint(*res.model_f64, (dir / "model.ckpt").string());

  std::vector<std::size_t> counts(opts.k, 0);
  for (auto l : res.labels) ++counts[l];
  std::ostringstream summary;
  summary << "clustered " << set.n() << " embeddings with " << f.model.method << ", sizes";
  for (auto c : counts) summary << ' ' << c;
  log.info(summary.str());
  if (!f.truth.empty()) {
    const auto truth = read_label_column(f.truth);
    if (truth.size() != res.labels.size()) {
      throw DataError("--truth has " + std::to_string(truth.size()) + " labels for " +
                      std::to_string(res.labels.size()) + " embeddings");
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "accuracy %.4f", clustering_accuracy(res.labels, truth));
    log.info(buf);
  }
  log.info("outputs in " + dir.string());
  return kExitOk;
}

// -------------------------------------------------------------- diarize

struct DiarizeFlags {
  std::vector<std::string> embeddings;
  std::string audio;
  std::vector<double> ws{1.0};
  ModelFlags model;
  bool no_vad = false;
  VadConfig vad;
  std::size_t jobs = 1;
};

Annotation diarize_one(const std::string& path, double w, const DiarizeFlags& f,
                       const AudioBuffer* audio) {
  EmbeddingSet set = read_embeddings(path);
  if (audio && !f.no_vad) {
    const EnergyVad vad(*audio, f.vad);
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < set.timings.size(); ++i) {
      Segment seg;
      seg.begin = static_cast<std::size_t>(std::llround(set.timings[i].start * audio->sample_rate));
      seg.end = static_cast<std::size_t>(std::llround(set.timings[i].end * audio->sample_rate));
      if (vad.is_speech(seg)) keep.push_back(i);
    }
    EmbeddingSet kept;
    kept.vectors = set.vectors.gather_rows(keep);
    for (auto i : keep) kept.timings.push_back(set.timings[i]);
    kept.recording_id = set.recording_id;
    kept.source_tag = set.source_tag;
    set = std::move(kept);
  }
  (void)w;
  return run_pipeline(set, f.model.options()).to_annotation();
}

int cmd_diarize(const DiarizeFlags& f, const GlobalFlags& g, Logger& log) {
  validate_windows(f.ws);
  if (f.embeddings.empty()) {
    if (!f.audio.empty()) {
      throw MissingCapability(
          "diarize: raw audio needs an embedding extractor, which is not part of this build; "
          "pass --embeddings produced by the extractor");
    }
    throw UsageError("diarize: --embeddings is required");
  }
  if (f.jobs == 0) throw UsageError("--jobs must be positive");
  std::optional<AudioBuffer> audio;
  if (!f.audio.empty()) audio = read_wav(f.audio);

  const fs::path dir = ensure_dir(g.out_dir);
  Json echo;
  echo["command"] = "diarize";
  echo["embeddings"] = f.embeddings;
  echo["audio"] = f.audio;
  echo["w"] = f.ws;
  echo["vad"] = {{"enabled", audio.has_value() && !f.no_vad},
                 {"abs_floor", f.vad.abs_floor},
                 {"rel_fraction", f.vad.rel_fraction},
                 {"percentile", f.vad.percentile},
                 {"min_active", f.vad.min_active}};
  echo["jobs"] = f.jobs;
  echo.update(f.model.echo());
  write_json(dir / "diarize_config.json", echo);

  struct Task {
    std::string path;
    double w;
  };
  std::vector<Task> tasks;
  for (double w : f.ws) {
    for (const auto& p : f.embeddings) tasks.push_back({expand_w(p, w), w});
  }
  std::vector<Annotation> results(tasks.size());
  const AudioBuffer* audio_ptr = audio ? &*audio : nullptr;
  for (std::size_t start = 0; start < tasks.size(); start += f.jobs) {
    const std::size_t stop = std::min(tasks.size(), start + f.jobs);
    std::vector<std::future<Annotation>> running;
    for (std::size_t t = start; t < stop; ++t) {
      running.push_back(std::async(f.jobs > 1 ? std::launch::async : std::launch::deferred,
                                   diarize_one, tasks[t].path, tasks[t].w, std::cref(f),
                                   audio_ptr));
    }
    for (std::size_t t = start; t < stop; ++t) results[t] = running[t - start].get();
  }

  std::size_t t = 0;
  for (double w : f.ws) {
    const fs::path out = dir / ("diarization_w" + format_w(w) + ".rttm");
    std::ofstream rttm(out);
    if (!rttm) throw DataError("cannot write " + out.string());
    for (std::size_t i = 0; i < f.embeddings.size(); ++i, ++t) {
      write_rttm(rttm, results[t]);
      log.info("W=" + format_w(w) + " " + tasks[t].path + ": " +
               std::to_string(results[t].turns.size()) + " turns, " +
               std::to_string(results[t].speakers().size()) + " speakers");
    }
    log.info("wrote " + out.string());
  }
  return kExitOk;
}

// ---------------------------------------------------------------- score

struct ScoreFlags {
  std::string ref;
  std::string hyp;
  double collar = 0.0;
  std::string csv;
  bool strict = false;
};

int cmd_score(const ScoreFlags& f, Logger& log) {
  if (f.collar < 0.0) throw UsageError("--collar must be non-negative");
  const auto refs = read_annotation_file(f.ref);
  auto hyps = read_annotation_file(f.hyp);
  if (refs.empty()) throw DataError(f.ref + ": no reference turns");
  // A single recording on each side is paired regardless of its id.
  if (refs.size() == 1 && hyps.size() == 1 && refs.begin()->first != hyps.begin()->first) {
    Annotation h = hyps.begin()->second;
    h.recording_id = refs.begin()->first;
    hyps = {{h.recording_id, h}};
  }
  std::vector<DerReport> reports;
  for (const auto& [id, ref] : refs) {
    Annotation hyp;
    hyp.recording_id = id;
    if (auto it = hyps.find(id); it != hyps.end()) hyp = it->second;
    else log.warn("no hypothesis for recording '" + id + "', scoring as empty");
    reports.push_back(der(ref, hyp, f.collar, f.strict));
  }
  std::ostringstream table;
  print_der_table(table, reports);
  log.info(table.str());
  if (!f.csv.empty()) {
    std::ofstream csv(f.csv);
    if (!csv) throw DataError("cannot write " + f.csv);
    write_der_csv(csv, reports);
  }
  return kExitOk;
}

// ------------------------------------------------------------ gradcheck

int cmd_gradcheck(const OracleSuiteConfig& cfg, Logger& log) {
  const auto results = run_gradient_oracles(cfg);
  bool ok = true;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-22s %14s %8s %8s  %s", "check", "max_rel_error", "seeds",
                "entries", "result");
  log.info(buf);
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "%-22s %14.3e %8zu %8zu  %s", r.name.c_str(), r.max_rel_error,
                  r.seeds, r.checked, r.passed ? "pass" : ("FAIL (" + r.worst_param + ")").c_str());
    log.info(buf);
    ok = ok && r.passed;
  }
  std::snprintf(buf, sizeof buf, "tolerance %.1e: %s", cfg.tolerance, ok ? "all checks pass" : "FAILED");
  log.info(buf);
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Speaker diarization with a mixture of sparse autoencoders", "sdiar"};
  app.require_subcommand(1);
  GlobalFlags global;
  app.add_option("--out-dir", global.out_dir, "Output directory (default $SDIAR_OUTPUT_DIR or .)")
      ->capture_default_str();
  app.add_option("--log", global.log_path, "Also append messages to this file");

  SynthFlags synth;
  auto* s = app.add_subcommand("synth", "Generate synthetic embeddings or conversations");
  s->add_option("--k", synth.spec.k, "Clusters / speakers")->capture_default_str();
  s->add_option("--dim", synth.dim, "Embedding width");
  s->add_option("--sep", synth.spec.separation, "Centroid distance in within-cluster stds")
      ->capture_default_str();
  s->add_option("--seed", synth.spec.seed, "Random seed")->capture_default_str();
  s->add_option("--points", synth.spec.points_per_cluster, "Points per cluster")
      ->capture_default_str();
  s->add_flag("--conversation", synth.conversation, "Generate a timed conversation");
  s->add_option("--duration", synth.spec.duration_s, "Conversation length in seconds")
      ->capture_default_str();
  s->add_option("--mean-turn", synth.spec.turns.mean_turn_s, "Mean turn length")
      ->capture_default_str();
  s->add_option("--min-turn", synth.spec.turns.min_turn_s, "Minimum turn length")
      ->capture_default_str();
  s->add_option("--silence-prob", synth.spec.turns.silence_prob, "Chance of a pause after a turn")
      ->capture_default_str();
  s->add_option("--mean-silence", synth.spec.turns.mean_silence_s, "Mean pause length")
      ->capture_default_str();
  s->add_option("--w", synth.ws, "Window lengths in seconds")->delimiter(',')->capture_default_str();
  s->add_option("--out", synth.out, "Output SDEB path ({w} is replaced by the window length)");
  s->add_option("--ref-out", synth.ref_out, "Reference CSV path (conversations)");
  s->add_option("--id", synth.id, "Recording id (conversations)")->capture_default_str();

  ClusterFlags cluster;
  auto* c = app.add_subcommand("cluster", "Cluster an embedding file");
  c->add_option("embeddings", cluster.embeddings, "SDEB file")->required();
  c->add_option("--truth", cluster.truth, "Ground-truth label CSV; prints accuracy");
  cluster.model.add_to(c);

  DiarizeFlags diarize;
  auto* d = app.add_subcommand("diarize", "Diarize timed embeddings into RTTM");
  d->add_option("--embeddings", diarize.embeddings, "SDEB file(s), {w} expands per window")
      ->expected(1, -1);
  d->add_option("--audio", diarize.audio, "WAV recording (used for energy VAD)");
  d->add_option("--w", diarize.ws, "Window lengths in seconds")->delimiter(',')->capture_default_str();
  d->add_flag("--no-vad", diarize.no_vad, "Skip the energy VAD even when audio is given");
  d->add_option("--vad-floor", diarize.vad.abs_floor, "Absolute RMS floor")->capture_default_str();
  d->add_option("--vad-rel", diarize.vad.rel_fraction, "Fraction of the frame-RMS percentile")
      ->capture_default_str();
  d->add_option("--vad-percentile", diarize.vad.percentile, "Frame-RMS percentile")
      ->capture_default_str();
  d->add_option("--vad-min-active", diarize.vad.min_active, "Active frame share for speech")
      ->capture_default_str();
  d->add_option("--jobs", diarize.jobs, "Recordings processed in parallel")->capture_default_str();
  diarize.model.add_to(d);

  ScoreFlags score;
  auto* sc = app.add_subcommand("score", "Score hypothesis turns against a reference");
  sc->add_option("--ref", score.ref, "Reference RTTM or CSV")->required();
  sc->add_option("--hyp", score.hyp, "Hypothesis RTTM or CSV")->required();
  sc->add_option("--collar", score.collar, "Collar in seconds")->capture_default_str();
  sc->add_option("--csv", score.csv, "Write the report as CSV");
  sc->add_flag("--strict", score.strict, "Reject references with overlapping speakers");

  OracleSuiteConfig oracle;
  auto* gc = app.add_subcommand("gradcheck", "Run the finite-difference gradient suite");
  gc->add_option("--seeds", oracle.seeds, "Seeds per check")->capture_default_str();
  gc->add_option("--tolerance", oracle.tolerance, "Maximum relative error")->capture_default_str();
  gc->add_flag("--inject-sign-error", oracle.inject_sign_error)->group("");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("sdiar");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Logger log{out, err, {}};
  if (!global.log_path.empty()) {
    log.file.open(global.log_path, std::ios::app);
    if (!log.file) {
      err << "error: cannot open log file " << global.log_path << '\n';
      return kExitData;
    }
  }
  try {
    if (s->parsed()) return cmd_synth(synth, global, log);
    if (c->parsed()) return cmd_cluster(cluster, global, log);
    if (d->parsed()) return cmd_diarize(diarize, global, log);
    if (sc->parsed()) return cmd_score(score, log);
    if (gc->parsed()) return cmd_gradcheck(oracle, log);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const MissingCapability& e) {
    err << "error: " << e.what() << '\n';
    return kExitMissingCapability;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace sdiar::cli
