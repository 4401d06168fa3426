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

#include "sdiar/sae.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "sdiar/error.hpp"

namespace sdiar {

void SaeArchitecture::validate() const {
  if (input_dim == 0) throw ConfigError("autoencoder input dim must be positive");
  if (latent_dim == 0 || latent_dim >= input_dim) {
    throw ConfigError("latent dim " + std::to_string(latent_dim) +
                      " must be positive and smaller than input dim " + std::to_string(input_dim));
  }
  for (auto h : encoder_hidden) {
    if (h == 0) throw ConfigError("hidden layer widths must be positive");
  }
}

void SparsityConfig::validate() const {
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("sparsity target rho must be in (0,1)");
  if (beta < 0.0) throw ConfigError("sparsity weight beta must be non-negative");
  if (!(clamp_eps > 0.0 && clamp_eps < 0.5)) throw ConfigError("clamp eps must be in (0, 0.5)");
}

template <typename T>
std::vector<double> average_activation(const Matrix<T>& activations, double clamp_eps) {
  std::vector<double> rho_hat(activations.cols(), 0.0);
  if (activations.rows() == 0) return rho_hat;
  for (std::size_t i = 0; i < activations.rows(); ++i) {
    for (std::size_t j = 0; j < activations.cols(); ++j) {
      rho_hat[j] += nn::sigmoid(static_cast<double>(activations(i, j)));
    }
  }
  for (auto& r : rho_hat) {
    r /= static_cast<double>(activations.rows());
    r = std::clamp(r, clamp_eps, 1.0 - clamp_eps);
  }
  return rho_hat;
}

double kl_penalty(double rho, std::span<const std::vector<double>> rho_hat) {
  double pen = 0.0;
  for (const auto& layer : rho_hat) {
    for (double r : layer) {
      pen += rho * std::log(rho / r) + (1.0 - rho) * std::log((1.0 - rho) / (1.0 - r));
    }
  }
  return pen;
}

template <typename T>
double mse_loss(const Matrix<T>& x, const Matrix<T>& x_bar) {
  require_same_shape(x.rows(), x.cols(), x_bar.rows(), x_bar.cols(), "mse_loss");
  if (x.rows() == 0) return 0.0;
  double acc = 0.0;
  auto a = x.flat();
  auto b = x_bar.flat();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc / (2.0 * static_cast<double>(x.rows()));
}

template <typename T>
SparseAutoencoder<T>::SparseAutoencoder(SaeArchitecture arch, SparsityConfig sparsity,
                                        std::mt19937_64& rng, BatchNormConfig bn)
    : arch_(std::move(arch)), sparsity_(sparsity) {
  arch_.validate();
  sparsity_.validate();
  // Layers feeding a dense -> batch-norm pair get no bias: batch-norm
  // cancels any constant shift.
  std::size_t prev = arch_.input_dim;
  for (auto h : arch_.encoder_hidden) {
    encoder_.push_back({nn::Dense<T>(prev, h, false, rng), nn::BatchNorm<T>(h, bn.eps, bn.momentum),
                        nn::LeakyRelu<T>()});
    prev = h;
  }
  latent_ = nn::Dense<T>(prev, arch_.latent_dim, arch_.encoder_hidden.empty(), rng);
  prev = arch_.latent_dim;
  for (auto h : arch_.decoder_hidden()) {
    decoder_.push_back({nn::Dense<T>(prev, h, false, rng), nn::BatchNorm<T>(h, bn.eps, bn.momentum),
                        nn::LeakyRelu<T>()});
    prev = h;
  }
  output_ = nn::Dense<T>(prev, arch_.input_dim, true, rng);
}

template <typename T>
SaeOutput<T> SparseAutoencoder<T>::forward(const Matrix<T>& x) {
  if (x.cols() != arch_.input_dim) {
    throw ConfigError("autoencoder expects " + std::to_string(arch_.input_dim) +
                      " input features, got " + std::to_string(x.cols()));
  }
  SaeOutput<T> out;
  out.activations.reserve(arch_.penalized_layers());
  Matrix<T> h = x;
  for (auto& b : encoder_) {
    h = b.act.forward(b.norm.forward(b.dense.forward(h)));
    out.activations.push_back(h);
  }
  out.latent = latent_.forward(h);
  h = out.latent;
  for (auto& b : decoder_) {
    h = b.act.forward(b.norm.forward(b.dense.forward(h)));
    out.activations.push_back(h);
  }
  out.reconstruction = output_.forward(h);
  return out;
}

template <typename T>
SaeOutput<T> SparseAutoencoder<T>::apply(const Matrix<T>& x) const {
  if (x.cols() != arch_.input_dim) {
    throw ConfigError("autoencoder expects " + std::to_string(arch_.input_dim) +
                      " input features, got " + std::to_string(x.cols()));
  }
  SaeOutput<T> out;
  Matrix<T> h = x;
  for (const auto& b : encoder_) {
    h = b.act.apply(b.norm.apply(b.dense.apply(h)));
    out.activations.push_back(h);
  }
  out.latent = latent_.apply(h);
  h = out.latent;
  for (const auto& b : decoder_) {
    h = b.act.apply(b.norm.apply(b.dense.apply(h)));
    out.activations.push_back(h);
  }
  out.reconstruction = output_.apply(h);
  return out;
}

namespace {

template <typename T>
void add_into(Matrix<T>& g, std::span<const Matrix<T>> extra, std::size_t layer) {
  if (layer >= extra.size() || extra[layer].empty()) return;
  require_same_shape(g.rows(), g.cols(), extra[layer].rows(), extra[layer].cols(),
                     "activation gradient");
  auto dst = g.flat();
  auto src = extra[layer].flat();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

template <typename T>
void SparseAutoencoder<T>::backward(const Matrix<T>& d_reconstruction,
                                    std::span<const Matrix<T>> d_activations) {
  const std::size_t depth = encoder_.size();
  Matrix<T> g = output_.backward(d_reconstruction);
  for (std::size_t b = decoder_.size(); b-- > 0;) {
    add_into(g, d_activations, depth + b);
    auto& blk = decoder_[b];
    g = blk.dense.backward(blk.norm.backward(blk.act.backward(g)));
  }
  g = latent_.backward(g);
  for (std::size_t b = encoder_.size(); b-- > 0;) {
    add_into(g, d_activations, b);
    auto& blk = encoder_[b];
    g = blk.dense.backward(blk.norm.backward(blk.act.backward(g)));
  }
}

template <typename T>
std::vector<Matrix<T>> penalty_gradients(std::span<const Matrix<T>> activations,
                                         const SparsityConfig& sparsity) {
  const double rho = sparsity.rho;
  const double eps = sparsity.clamp_eps;
  std::vector<Matrix<T>> grads;
  grads.reserve(activations.size());
  for (const auto& a : activations) {
    const double inv_n = 1.0 / static_cast<double>(a.rows());
    Matrix<T> d(a.rows(), a.cols());
    std::vector<double> mean(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
      for (std::size_t j = 0; j < a.cols(); ++j) mean[j] += nn::sigmoid(static_cast<double>(a(i, j)));
    }
    for (std::size_t j = 0; j < a.cols(); ++j) {
      mean[j] *= inv_n;
      // The clamp has zero slope where it is active.
      const bool clamped = mean[j] < eps || mean[j] > 1.0 - eps;
      const double dkl = clamped ? 0.0 : (-rho / mean[j] + (1.0 - rho) / (1.0 - mean[j]));
      const double scale = sparsity.beta * dkl * inv_n;
      for (std::size_t i = 0; i < a.rows(); ++i) {
        const double s = nn::sigmoid(static_cast<double>(a(i, j)));
        d(i, j) = static_cast<T>(scale * s * (1.0 - s));
      }
    }
    grads.push_back(std::move(d));
  }
  return grads;
}

template <typename T>
SaeLoss SparseAutoencoder<T>::loss(const Matrix<T>& x, bool with_backward) {
  SaeOutput<T> out = forward(x);
  const std::size_t n = x.rows();
  const double rho = sparsity_.rho;
  const double eps = sparsity_.clamp_eps;

  std::vector<std::vector<double>> rho_hat;
  rho_hat.reserve(out.activations.size());
  for (const auto& a : out.activations) rho_hat.push_back(average_activation(a, eps));

  SaeLoss l;
  l.mse = mse_loss(x, out.reconstruction);
  l.pen = kl_penalty(rho, rho_hat);
  l.total = l.mse + sparsity_.beta * l.pen;
  if (!with_backward) return l;

  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix<T> d_rec(n, x.cols());
  for (std::size_t i = 0; i < d_rec.size(); ++i) {
    d_rec.flat()[i] = static_cast<T>((static_cast<double>(out.reconstruction.flat()[i]) -
                                      static_cast<double>(x.flat()[i])) *
                                     inv_n);
  }

  std::vector<Matrix<T>> d_act;
  if (sparsity_.beta != 0.0) d_act = penalty_gradients<T>(out.activations, sparsity_);
  backward(d_rec, d_act);
  return l;
}

template <typename T>
void SparseAutoencoder<T>::zero_grad() {
  for (auto& b : encoder_) {
    b.dense.zero_grad();
    b.norm.zero_grad();
  }
  latent_.zero_grad();
  for (auto& b : decoder_) {
    b.dense.zero_grad();
    b.norm.zero_grad();
  }
  output_.zero_grad();
}

template <typename T>
void SparseAutoencoder<T>::collect_params(const std::string& prefix,
                                          std::vector<nn::ParamRef<T>>& out) {
  for (std::size_t i = 0; i < encoder_.size(); ++i) {
    const std::string p = prefix + ".enc" + std::to_string(i);
    encoder_[i].dense.collect_params(p + ".dense", out);
    encoder_[i].norm.collect_params(p + ".bn", out);
  }
  latent_.collect_params(prefix + ".latent", out);
  for (std::size_t i = 0; i < decoder_.size(); ++i) {
    const std::string p = prefix + ".dec" + std::to_string(i);
    decoder_[i].dense.collect_params(p + ".dense", out);
    decoder_[i].norm.collect_params(p + ".bn", out);
  }
  output_.collect_params(prefix + ".out", out);
}

template <typename T>
void SparseAutoencoder<T>::set_mode(nn::Mode m) {
  for (auto& b : encoder_) b.norm.set_mode(m);
  for (auto& b : decoder_) b.norm.set_mode(m);
}

template <typename T>
std::vector<EpochStats> sae_train(SparseAutoencoder<T>& sae, const Matrix<T>& data,
                                  const TrainConfig& config) {
  const std::size_t n = data.rows();
  if (n == 0) throw DataError("cannot train an autoencoder on an empty dataset");
  if (n < 2) throw DataError("autoencoder training needs at least two samples");
  if (config.batch_size < 2) throw ConfigError("batch size must be at least 2");

  std::vector<EpochStats> log;
  if (config.epochs == 0) return log;

  std::mt19937_64 rng(config.seed);
  nn::Optimizer<T> opt(config.optimizer);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<nn::ParamRef<T>> params;
  sae.set_mode(nn::Mode::kTrain);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochStats stats;
    stats.epoch = epoch;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      if (stop - start < 2) continue;
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const Matrix<T> batch = data.gather_rows(idx);
      sae.zero_grad();
      const SaeLoss l = sae.loss(batch, true);
      params.clear();
      sae.collect_params("sae", params);
      opt.step(params);
      const double w = static_cast<double>(idx.size());
      stats.total += l.total * w;
      stats.mse += l.mse * w;
      stats.pen += l.pen * w;
      seen += idx.size();
    }
    const double denom = static_cast<double>(std::max<std::size_t>(seen, 1));
    stats.total /= denom;
    stats.mse /= denom;
    stats.pen /= denom;
    log.push_back(stats);
  }
  if (config.log_path) write_training_log(*config.log_path, log);
  return log;
}

void write_training_log(const std::string& path, std::span<const EpochStats> log) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open training log " + path);
  out.precision(17);
  out << "epoch,total,mse,pen\n";
  for (const auto& e : log) out << e.epoch << ',' << e.total << ',' << e.mse << ',' << e.pen << '\n';
}

template std::vector<double> average_activation<float>(const Matrix<float>&, double);
template std::vector<double> average_activation<double>(const Matrix<double>&, double);
template double mse_loss<float>(const Matrix<float>&, const Matrix<float>&);
template double mse_loss<double>(const Matrix<double>&, const Matrix<double>&);
template std::vector<Matrix<float>> penalty_gradients<float>(std::span<const Matrix<float>>,
                                                             const SparsityConfig&);
template std::vector<Matrix<double>> penalty_gradients<double>(std::span<const Matrix<double>>,
                                                               const SparsityConfig&);
template class SparseAutoencoder<float>;
template class SparseAutoencoder<double>;
template std::vector<EpochStats> sae_train<float>(SparseAutoencoder<float>&, const Matrix<float>&,
                                                  const TrainConfig&);
template std::vector<EpochStats> sae_train<double>(SparseAutoencoder<double>&,
                                                   const Matrix<double>&, const TrainConfig&);

}  // namespace sdiar
