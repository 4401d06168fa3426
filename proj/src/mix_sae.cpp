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

#include "sdiar/mix_sae.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>

#include "sdiar/clustering.hpp"
#include "sdiar/error.hpp"
#include "sdiar/seed.hpp"

namespace sdiar {

namespace {

constexpr double kLogClamp = 1e-12;

// Stream tags for derive_seed.
enum : std::uint64_t {
  kTagGate = 1000,
  kTagPreInit = 2000,
  kTagPreTrain = 2001,
  kTagKMeans = 2002,
  kTagClusterTrain = 3000,
  kTagMain = 4000,
};

}  // namespace

SaeArchitecture MixSaeConfig::architecture() const {
  SaeArchitecture a;
  a.input_dim = input_dim;
  a.encoder_hidden = encoder_hidden;
  a.latent_dim = latent_dim == 0 ? k : latent_dim;
  return a;
}

void MixSaeConfig::validate() const {
  if (k < 2) throw ConfigError("Mix-SAE needs at least two clusters (k=" + std::to_string(k) + ")");
  architecture().validate();
  sparsity.validate();
  if (tau == 0) throw ConfigError("pseudo-label period tau must be positive");
  if (batch_size < 2) throw ConfigError("batch size must be at least 2");
  if (kmeans_restarts == 0) throw ConfigError("kmeans_restarts must be positive");
  if (alpha < 0.0) throw ConfigError("alpha must be non-negative");
}

// -------------------------------------------------------------- gate

template <typename T>
GatingProjection<T>::GatingProjection(std::size_t input_dim, std::size_t k,
                                      std::size_t hidden_dim, std::mt19937_64& rng) {
  std::size_t prev = input_dim;
  if (hidden_dim > 0) {
    hidden_.emplace(input_dim, hidden_dim, true, rng);
    prev = hidden_dim;
  }
  output_ = nn::Dense<T>(prev, k, true, rng);
}

template <typename T>
std::size_t GatingProjection<T>::input_dim() const noexcept {
  return hidden_ ? hidden_->in_dim() : output_.in_dim();
}

template <typename T>
Matrix<T> GatingProjection<T>::logits(const Matrix<T>& x) const {
  if (hidden_) return output_.apply(act_.apply(hidden_->apply(x)));
  return output_.apply(x);
}

template <typename T>
Matrix<T> GatingProjection<T>::apply(const Matrix<T>& x) const {
  return nn::softmax_rows(logits(x));
}

template <typename T>
Matrix<T> GatingProjection<T>::forward(const Matrix<T>& x) {
  Matrix<T> z = hidden_ ? output_.forward(act_.forward(hidden_->forward(x))) : output_.forward(x);
  prob_ = nn::softmax_rows(z);
  return prob_;
}

template <typename T>
void GatingProjection<T>::backward(const Matrix<T>& d_prob) {
  Matrix<T> g = output_.backward(nn::softmax_backward(prob_, d_prob));
  if (hidden_) hidden_->backward(act_.backward(g));
}

template <typename T>
void GatingProjection<T>::zero_grad() {
  if (hidden_) hidden_->zero_grad();
  output_.zero_grad();
}

template <typename T>
void GatingProjection<T>::collect_params(const std::string& prefix,
                                         std::vector<nn::ParamRef<T>>& out) {
  if (hidden_) hidden_->collect_params(prefix + ".hidden", out);
  output_.collect_params(prefix + ".out", out);
}

template <typename T>
void GatingProjection<T>::permute_outputs(std::span<const std::size_t> perm) {
  if (perm.size() != k()) throw ConfigError("gate permutation has wrong length");
  const Matrix<T> w = output_.weights();
  const std::vector<T> b = output_.bias();
  for (std::size_t i = 0; i < perm.size(); ++i) {
    std::copy_n(w.row(perm[i]).begin(), w.cols(), output_.weights().row(i).begin());
    output_.bias()[i] = b[perm[i]];
  }
}

// ------------------------------------------------------------- losses

Matrix<double> PseudoLabelState::one_hot() const {
  Matrix<double> m(labels.size(), k, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) m(i, labels[i]) = 1.0;
  return m;
}

double weighted_reconstruction_loss(const Matrix<double>& p_hat, const Matrix<double>& sq_err) {
  require_same_shape(p_hat.rows(), p_hat.cols(), sq_err.rows(), sq_err.cols(),
                     "weighted_reconstruction_loss");
  if (p_hat.rows() == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < p_hat.rows(); ++i) {
    for (std::size_t j = 0; j < p_hat.cols(); ++j) acc += p_hat(i, j) * std::exp(-0.5 * sq_err(i, j));
  }
  return -acc / static_cast<double>(p_hat.rows());
}

double pseudo_label_loss(const Matrix<double>& p_hat, std::span<const std::size_t> labels) {
  if (labels.size() != p_hat.rows()) throw ConfigError("one pseudo-label per row is required");
  if (labels.empty()) return 0.0;
  long double acc = 0.0L;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= p_hat.cols()) {
      throw ConfigError("pseudo-label " + std::to_string(labels[i]) + " out of range for k=" +
                        std::to_string(p_hat.cols()));
    }
    acc += std::log(std::max(p_hat(i, labels[i]), kLogClamp));
  }
  return static_cast<double>(-acc / static_cast<long double>(labels.size()));
}

Matrix<double> weighted_reconstruction_grad(const Matrix<double>& sq_err) {
  Matrix<double> g(sq_err.rows(), sq_err.cols());
  const double inv_n = sq_err.rows() ? 1.0 / static_cast<double>(sq_err.rows()) : 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) g.flat()[i] = -std::exp(-0.5 * sq_err.flat()[i]) * inv_n;
  return g;
}

Matrix<double> pseudo_label_grad(const Matrix<double>& p_hat, std::span<const std::size_t> labels) {
  if (labels.size() != p_hat.rows()) throw ConfigError("one pseudo-label per row is required");
  Matrix<double> g(p_hat.rows(), p_hat.cols());
  const double inv_n = labels.empty() ? 0.0 : 1.0 / static_cast<double>(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double v = p_hat(i, labels[i]);
    if (v > kLogClamp) g(i, labels[i]) = -inv_n / v;
  }
  return g;
}

std::vector<std::size_t> argmax_rows(const Matrix<double>& p) {
  std::vector<std::size_t> out(p.rows(), 0);
  for (std::size_t i = 0; i < p.rows(); ++i) {
    auto r = p.row(i);
    out[i] = static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

// -------------------------------------------------------------- model

template <typename T>
MixSae<T>::MixSae(MixSaeConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  const SaeArchitecture arch = config_.architecture();
  autoencoders_.reserve(config_.k);
  for (std::size_t i = 0; i < config_.k; ++i) {
    std::mt19937_64 rng(derive_seed(seed, i));
    autoencoders_.emplace_back(arch, config_.sparsity, rng, config_.batch_norm);
  }
  std::mt19937_64 rng(derive_seed(seed, kTagGate));
  gate_ = GatingProjection<T>(config_.input_dim, config_.k, config_.gate_hidden, rng);
  if (config_.gate_init == GateInit::kZero) gate_.output_layer().weights().fill(T(0));
}

template <typename T>
Matrix<double> MixSae<T>::reconstruction_errors(const Matrix<T>& x) const {
  Matrix<double> e(x.rows(), k(), 0.0);
  const double scale =
      config_.reduction == ReconReduction::kMean ? 1.0 / static_cast<double>(x.cols()) : 1.0;
  for (std::size_t j = 0; j < k(); ++j) {
    const Matrix<T> rec = autoencoders_[j].apply(x).reconstruction;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double acc = 0.0;
      for (std::size_t d = 0; d < x.cols(); ++d) {
        const double t = static_cast<double>(x(i, d)) - static_cast<double>(rec(i, d));
        acc += t * t;
      }
      e(i, j) = acc * scale;
    }
  }
  return e;
}

template <typename T>
MainLoss MixSae<T>::loss(const Matrix<T>& x, std::span<const std::size_t> labels,
                         bool with_backward) {
  const std::size_t n = x.rows();
  const std::size_t kk = k();
  const double scale =
      config_.reduction == ReconReduction::kMean ? 1.0 / static_cast<double>(x.cols()) : 1.0;
  const Matrix<double> p = gate_.forward(x).template cast<double>();

  // Experts share no parameters: their passes run independently.
  std::vector<Matrix<T>> recon(kk);
  Matrix<double> e(n, kk, 0.0);
  std::exception_ptr failure;
  const std::ptrdiff_t kn = static_cast<std::ptrdiff_t>(kk);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < kn; ++j) {
    try {
      recon[j] = autoencoders_[j].forward(x).reconstruction;
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t d = 0; d < x.cols(); ++d) {
          const double t = static_cast<double>(x(i, d)) - static_cast<double>(recon[j](i, d));
          acc += t * t;
        }
        e(i, j) = acc * scale;
      }
    } catch (...) {
#pragma omp critical(sdiar_mix_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  MainLoss l;
  l.rec = weighted_reconstruction_loss(p, e);
  l.ent = pseudo_label_loss(p, labels);
  l.total = l.rec + config_.alpha * l.ent;
  if (!with_backward) return l;

  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix<double> dp = weighted_reconstruction_grad(e);
  const Matrix<double> dp_ent = pseudo_label_grad(p, labels);
  for (std::size_t i = 0; i < dp.size(); ++i) dp.flat()[i] += config_.alpha * dp_ent.flat()[i];

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < kn; ++j) {
    try {
      Matrix<T> d_rec(n, x.cols());
      for (std::size_t i = 0; i < n; ++i) {
        const double w = p(i, j) * std::exp(-0.5 * e(i, j)) * inv_n * scale;
        for (std::size_t d = 0; d < x.cols(); ++d) {
          d_rec(i, d) = static_cast<T>(
              w * (static_cast<double>(recon[j](i, d)) - static_cast<double>(x(i, d))));
        }
      }
      autoencoders_[j].backward(d_rec);
    } catch (...) {
#pragma omp critical(sdiar_mix_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  gate_.backward(dp.template cast<T>());
  return l;
}

template <typename T>
std::vector<std::size_t> MixSae<T>::infer_labels(const Matrix<T>& x) const {
  return argmax_rows(gate_probabilities(x).template cast<double>());
}

template <typename T>
void MixSae<T>::zero_grad() {
  for (auto& ae : autoencoders_) ae.zero_grad();
  gate_.zero_grad();
}

template <typename T>
void MixSae<T>::collect_params(std::vector<nn::ParamRef<T>>& out) {
  for (std::size_t i = 0; i < autoencoders_.size(); ++i) {
    autoencoders_[i].collect_params("ae" + std::to_string(i), out);
  }
  gate_.collect_params("gate", out);
}

template <typename T>
void MixSae<T>::set_mode(nn::Mode m) {
  for (auto& ae : autoencoders_) ae.set_mode(m);
}

template <typename T>
MixSae<T> MixSae<T>::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != k()) throw ConfigError("permutation length must equal k");
  std::vector<char> seen(k(), 0);
  for (auto p : perm) {
    if (p >= k() || seen[p]) throw ConfigError("not a permutation");
    seen[p] = 1;
  }
  MixSae out = *this;
  for (std::size_t i = 0; i < k(); ++i) out.autoencoders_[i] = autoencoders_[perm[i]];
  out.gate_.permute_outputs(perm);
  return out;
}

// ----------------------------------------------------------- training

template <typename T>
PretrainReport pretrain(MixSae<T>& model, const Matrix<T>& data, std::uint64_t seed) {
  const MixSaeConfig& cfg = model.config();
  const std::size_t n = data.rows();
  if (n < cfg.k) {
    throw DataError("pretraining needs at least k samples (n=" + std::to_string(n) +
                    ", k=" + std::to_string(cfg.k) + ")");
  }
  PretrainReport report;

  std::mt19937_64 init_rng(derive_seed(seed, kTagPreInit));
  SparseAutoencoder<T> pre(cfg.architecture(), cfg.sparsity, init_rng, cfg.batch_norm);
  TrainConfig tc;
  tc.epochs = cfg.pretrain_epochs;
  tc.batch_size = cfg.batch_size;
  tc.optimizer = cfg.optimizer;
  tc.seed = derive_seed(seed, kTagPreTrain);
  report.main_log = sae_train(pre, data, tc);

  const Matrix<double> latent = pre.encode(data).template cast<double>();
  KMeansResult km =
      kmeans_fit_restarts(latent, cfg.k, derive_seed(seed, kTagKMeans), cfg.kmeans_restarts);
  report.pseudo.labels = std::move(km.labels);
  report.pseudo.k = cfg.k;
  report.pseudo.epoch = 0;

  tc.epochs = cfg.cluster_epochs;
  for (std::size_t c = 0; c < cfg.k; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i) {
      if (report.pseudo.labels[i] == c) idx.push_back(i);
    }
    report.cluster_sizes.push_back(idx.size());
    tc.seed = derive_seed(seed, kTagClusterTrain + c);
    if (idx.size() < 2) {
      report.warnings.push_back("cluster " + std::to_string(c) + " has " +
                                std::to_string(idx.size()) +
                                " point(s); its autoencoder was trained on the full dataset");
      report.cluster_logs.push_back(sae_train(model.autoencoders()[c], data, tc));
    } else {
      report.cluster_logs.push_back(sae_train(model.autoencoders()[c], data.gather_rows(idx), tc));
    }
  }
  return report;
}

template <typename T>
std::vector<MainEpochStats> main_train(MixSae<T>& model, const Matrix<T>& data,
                                       PseudoLabelState& pseudo, std::uint64_t seed) {
  const MixSaeConfig& cfg = model.config();
  const std::size_t n = data.rows();
  if (pseudo.labels.size() != n) throw ConfigError("pseudo-labels must cover every sample");
  if (n < 2) throw DataError("main training needs at least two samples");

  std::mt19937_64 rng(derive_seed(seed, kTagMain));
  nn::Optimizer<T> opt(cfg.optimizer);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<nn::ParamRef<T>> params;
  std::vector<std::size_t> batch_labels;
  std::vector<MainEpochStats> log;
  model.set_mode(nn::Mode::kTrain);

  for (std::size_t epoch = 1; epoch <= cfg.main_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    MainEpochStats stats;
    stats.epoch = epoch;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      if (stop - start < 2) continue;
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const Matrix<T> batch = data.gather_rows(idx);
      batch_labels.clear();
      for (auto i : idx) batch_labels.push_back(pseudo.labels[i]);
      model.zero_grad();
      const MainLoss l = model.loss(batch, batch_labels, true);
      params.clear();
      model.collect_params(params);
      opt.step(params);
      const double w = static_cast<double>(idx.size());
      stats.total += l.total * w;
      stats.rec += l.rec * w;
      stats.ent += l.ent * w;
      seen += idx.size();
    }
    const double denom = static_cast<double>(std::max<std::size_t>(seen, 1));
    stats.total /= denom;
    stats.rec /= denom;
    stats.ent /= denom;
    if (epoch % cfg.tau == 0) {
      const std::vector<std::size_t> next = model.infer_labels(data);
      std::size_t changed = 0;
      for (std::size_t i = 0; i < n; ++i) changed += next[i] != pseudo.labels[i];
      stats.labels_updated = true;
      stats.fraction_changed = static_cast<double>(changed) / static_cast<double>(n);
      pseudo.labels = next;
      pseudo.epoch = epoch;
    }
    log.push_back(stats);
  }
  return log;
}

void write_main_log(const std::string& path, std::span<const MainEpochStats> log) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open training log " + path);
  out.precision(17);
  out << "epoch,total,rec,ent,labels_updated,fraction_changed\n";
  for (const auto& e : log) {
    out << e.epoch << ',' << e.total << ',' << e.rec << ',' << e.ent << ','
        << (e.labels_updated ? 1 : 0) << ',' << e.fraction_changed << '\n';
  }
}

template class GatingProjection<float>;
template class GatingProjection<double>;
template class MixSae<float>;
template class MixSae<double>;
template PretrainReport pretrain<float>(MixSae<float>&, const Matrix<float>&, std::uint64_t);
template PretrainReport pretrain<double>(MixSae<double>&, const Matrix<double>&, std::uint64_t);
template std::vector<MainEpochStats> main_train<float>(MixSae<float>&, const Matrix<float>&,
                                                       PseudoLabelState&, std::uint64_t);
template std::vector<MainEpochStats> main_train<double>(MixSae<double>&, const Matrix<double>&,
                                                        PseudoLabelState&, std::uint64_t);

}  // namespace sdiar
