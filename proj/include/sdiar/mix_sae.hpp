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

// Mixture of sparse autoencoders. Each of the k autoencoders stands in for
// a cluster centroid; a softmax gate routes every sample over the experts
// and its argmax is the cluster label. Training runs in two phases:
//
//   pretrain   - one autoencoder on all data, k-Means++ on its latents for
//                the initial pseudo-labels, then autoencoder i on cluster i.
//   main_train - joint optimisation of all experts and the gate on the
//                gated reconstruction kernel plus pseudo-label cross-entropy,
//                with labels refreshed from the gate every tau epochs.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sdiar/matrix.hpp"
#include "sdiar/nn.hpp"
#include "sdiar/optim.hpp"
#include "sdiar/sae.hpp"

namespace sdiar {

/// How the squared reconstruction error inside exp(-e/2) is reduced over
/// features. kSum is the literal objective; kMean divides by the feature
/// count and keeps the kernel away from underflow for wide embeddings.
enum class ReconReduction { kSum, kMean };

/// Initial gate output layer. kZero starts every sample at the uniform
/// distribution over experts; hidden gate layers are always Glorot.
enum class GateInit { kZero, kGlorot };

struct MixSaeConfig {
  std::size_t k = 2;
  std::size_t input_dim = 0;
  std::vector<std::size_t> encoder_hidden{256, 128, 64, 32};
  /// 0 means "use k".
  std::size_t latent_dim = 0;
  SparsityConfig sparsity{};
  BatchNormConfig batch_norm{};
  double alpha = 1.0;
  std::size_t tau = 10;
  std::size_t main_epochs = 20;
  std::size_t pretrain_epochs = 50;
  std::size_t cluster_epochs = 20;
  std::size_t batch_size = 16;
  nn::OptimizerConfig optimizer{};
  /// 0 selects the affine gate softmax(Wx + b); otherwise one leaky-ReLU
  /// hidden layer of this width precedes the output projection.
  std::size_t gate_hidden = 0;
  ReconReduction reduction = ReconReduction::kSum;
  GateInit gate_init = GateInit::kZero;
  /// k-Means++ runs on the pretrained latents; the lowest inertia wins.
  std::size_t kmeans_restarts = 10;

  SaeArchitecture architecture() const;
  void validate() const;
};

/// Softmax gate over the k experts.
template <typename T>
class GatingProjection {
 public:
  GatingProjection() = default;
  GatingProjection(std::size_t input_dim, std::size_t k, std::size_t hidden_dim,
                   std::mt19937_64& rng);

  /// Returns the N x k probability matrix and caches for backward().
  Matrix<T> forward(const Matrix<T>& x);
  Matrix<T> apply(const Matrix<T>& x) const;
  Matrix<T> logits(const Matrix<T>& x) const;
  /// Takes d loss / d probabilities.
  void backward(const Matrix<T>& d_prob);

  void zero_grad();
  void collect_params(const std::string& prefix, std::vector<nn::ParamRef<T>>& out);
  /// Reorders the output units: new unit i is old unit perm[i].
  void permute_outputs(std::span<const std::size_t> perm);

  std::size_t k() const noexcept { return output_.out_dim(); }
  std::size_t input_dim() const noexcept;
  bool has_hidden() const noexcept { return hidden_.has_value(); }
  nn::Dense<T>& output_layer() noexcept { return output_; }
  const nn::Dense<T>& output_layer() const noexcept { return output_; }
  std::optional<nn::Dense<T>>& hidden_layer() noexcept { return hidden_; }
  const std::optional<nn::Dense<T>>& hidden_layer() const noexcept { return hidden_; }

 private:
  std::optional<nn::Dense<T>> hidden_;
  nn::LeakyRelu<T> act_;
  nn::Dense<T> output_;
  Matrix<T> prob_;
};

struct PseudoLabelState {
  std::vector<std::size_t> labels;
  std::size_t k = 0;
  /// Epoch at which these labels were produced (0 = pretraining).
  std::size_t epoch = 0;

  Matrix<double> one_hot() const;
};

struct MainLoss {
  double total = 0.0;
  double rec = 0.0;
  double ent = 0.0;
};

/// L_rec = -(1/N) sum_i sum_j p_ij exp(-e_ij / 2) for N x k matrices.
double weighted_reconstruction_loss(const Matrix<double>& p_hat, const Matrix<double>& sq_err);

/// L_ent = -(1/N) sum_i log p_hat(i, label_i), log argument clamped at 1e-12.
double pseudo_label_loss(const Matrix<double>& p_hat, std::span<const std::size_t> labels);

/// d L_rec / d p_hat.
Matrix<double> weighted_reconstruction_grad(const Matrix<double>& sq_err);

/// d L_ent / d p_hat; zero where the clamp is active.
Matrix<double> pseudo_label_grad(const Matrix<double>& p_hat, std::span<const std::size_t> labels);

/// Argmax per row, ties to the lowest index.
std::vector<std::size_t> argmax_rows(const Matrix<double>& p);

template <typename T>
class MixSae {
 public:
  MixSae() = default;
  /// Fresh, independently initialised experts and gate. Throws ConfigError for k < 2.
  MixSae(MixSaeConfig config, std::uint64_t seed);

  const MixSaeConfig& config() const noexcept { return config_; }
  MixSaeConfig& config() noexcept { return config_; }
  std::size_t k() const noexcept { return autoencoders_.size(); }

  std::vector<SparseAutoencoder<T>>& autoencoders() noexcept { return autoencoders_; }
  const std::vector<SparseAutoencoder<T>>& autoencoders() const noexcept { return autoencoders_; }
  GatingProjection<T>& gate() noexcept { return gate_; }
  const GatingProjection<T>& gate() const noexcept { return gate_; }

  /// Gate probabilities without touching any training state.
  Matrix<T> gate_probabilities(const Matrix<T>& x) const { return gate_.apply(x); }

  /// Per-sample squared reconstruction error of each expert (N x k),
  /// eval-mode, reduced according to the configured reduction.
  Matrix<double> reconstruction_errors(const Matrix<T>& x) const;

  /// L_main = L_rec + alpha * L_ent on one batch with experts in their
  /// current mode. With `with_backward`, gradients reach every expert and
  /// the gate.
  MainLoss loss(const Matrix<T>& x, std::span<const std::size_t> labels, bool with_backward);

  /// Cluster label per row from the gate.
  std::vector<std::size_t> infer_labels(const Matrix<T>& x) const;

  void zero_grad();
  void collect_params(std::vector<nn::ParamRef<T>>& out);
  void set_mode(nn::Mode m);

  /// Copy whose expert i and gate unit i are this model's perm[i].
  MixSae permuted(std::span<const std::size_t> perm) const;

 private:
  MixSaeConfig config_;
  std::vector<SparseAutoencoder<T>> autoencoders_;
  GatingProjection<T> gate_;
};

struct PretrainReport {
  PseudoLabelState pseudo;
  std::vector<EpochStats> main_log;
  std::vector<std::vector<EpochStats>> cluster_logs;
  std::vector<std::size_t> cluster_sizes;
  std::vector<std::string> warnings;
};

/// Pretraining phase. Throws DataError when the data has fewer than k rows.
template <typename T>
PretrainReport pretrain(MixSae<T>& model, const Matrix<T>& data, std::uint64_t seed);

struct MainEpochStats {
  std::size_t epoch = 0;
  double total = 0.0;
  double rec = 0.0;
  double ent = 0.0;
  bool labels_updated = false;
  double fraction_changed = 0.0;
};

/// Main-training phase; updates `pseudo` in place at epochs tau, 2tau, ...
template <typename T>
std::vector<MainEpochStats> main_train(MixSae<T>& model, const Matrix<T>& data,
                                       PseudoLabelState& pseudo, std::uint64_t seed);

void write_main_log(const std::string& path, std::span<const MainEpochStats> log);

/// Checkpoint container. Parameters are stored as little-endian float32.
template <typename T>
void save_checkpoint(const MixSae<T>& model, std::ostream& out);
template <typename T>
void save_checkpoint(const MixSae<T>& model, const std::string& path);
template <typename T>
MixSae<T> load_checkpoint(std::istream& in);
template <typename T>
MixSae<T> load_checkpoint(const std::string& path);

}  // namespace sdiar
