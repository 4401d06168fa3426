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

// Sparse autoencoder: encoder blocks (dense -> batch-norm -> leaky ReLU),
// a linear latent layer, mirrored decoder blocks and a linear output layer.
// The sparsity penalty is a KL divergence between a target activation rate
// and the batch-mean sigmoid of each hidden block's output.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sdiar/matrix.hpp"
#include "sdiar/nn.hpp"
#include "sdiar/optim.hpp"

namespace sdiar {

struct SaeArchitecture {
  std::size_t input_dim = 0;
  std::vector<std::size_t> encoder_hidden{256, 128, 64, 32};
  std::size_t latent_dim = 2;

  std::vector<std::size_t> decoder_hidden() const {
    return {encoder_hidden.rbegin(), encoder_hidden.rend()};
  }
  /// Number of hidden blocks that carry the sparsity penalty (2L).
  std::size_t penalized_layers() const noexcept { return 2 * encoder_hidden.size(); }
  /// Throws ConfigError unless 0 < latent_dim < input_dim and all widths are positive.
  void validate() const;
};

struct SparsityConfig {
  double rho = 0.2;
  double beta = 0.01;
  double clamp_eps = 1e-7;
  void validate() const;
};

struct BatchNormConfig {
  double eps = 1e-5;
  double momentum = 0.1;
};

template <typename T>
struct SaeOutput {
  Matrix<T> latent;
  Matrix<T> reconstruction;
  /// Post-activation outputs of the 2L hidden blocks, encoder first.
  std::vector<Matrix<T>> activations;
};

struct SaeLoss {
  double total = 0.0;
  double mse = 0.0;
  double pen = 0.0;
};

/// Mean over the batch of sigmoid(activation) per unit, clamped into
/// [clamp_eps, 1 - clamp_eps].
template <typename T>
std::vector<double> average_activation(const Matrix<T>& activations, double clamp_eps = 1e-7);

/// KL(rho || rho_hat) summed over every unit of every layer given.
double kl_penalty(double rho, std::span<const std::vector<double>> rho_hat);

/// (1 / 2N) * sum_i ||x_i - x_bar_i||^2.
template <typename T>
double mse_loss(const Matrix<T>& x, const Matrix<T>& x_bar);

/// beta * d L_pen / d activation for each hidden block output.
template <typename T>
std::vector<Matrix<T>> penalty_gradients(std::span<const Matrix<T>> activations,
                                         const SparsityConfig& sparsity);

template <typename T>
class SparseAutoencoder {
 public:
  SparseAutoencoder() = default;
  SparseAutoencoder(SaeArchitecture arch, SparsityConfig sparsity, std::mt19937_64& rng,
                    BatchNormConfig bn = {});

  /// Forward in the current mode; caches everything backward() needs.
  SaeOutput<T> forward(const Matrix<T>& x);
  /// Eval-mode forward that leaves caches and running statistics untouched.
  SaeOutput<T> apply(const Matrix<T>& x) const;
  Matrix<T> encode(const Matrix<T>& x) const { return apply(x).latent; }

  /// Back-propagates d loss / d reconstruction plus optional extra gradients
  /// on each hidden block output (empty vector or empty matrices mean none).
  void backward(const Matrix<T>& d_reconstruction,
                std::span<const Matrix<T>> d_activations = {});

  /// L_SAE = L_MSE + beta * L_pen on one batch. With `with_backward`,
  /// gradients of the total are accumulated into the parameters.
  SaeLoss loss(const Matrix<T>& x, bool with_backward);

  void zero_grad();
  void collect_params(const std::string& prefix, std::vector<nn::ParamRef<T>>& out);
  void set_mode(nn::Mode m);

  const SaeArchitecture& architecture() const noexcept { return arch_; }
  const SparsityConfig& sparsity() const noexcept { return sparsity_; }
  SparsityConfig& sparsity() noexcept { return sparsity_; }

  struct Block {
    nn::Dense<T> dense;
    nn::BatchNorm<T> norm;
    nn::LeakyRelu<T> act;
  };
  std::vector<Block>& encoder() noexcept { return encoder_; }
  std::vector<Block>& decoder() noexcept { return decoder_; }
  nn::Dense<T>& latent_layer() noexcept { return latent_; }
  nn::Dense<T>& output_layer() noexcept { return output_; }
  const std::vector<Block>& encoder() const noexcept { return encoder_; }
  const std::vector<Block>& decoder() const noexcept { return decoder_; }
  const nn::Dense<T>& latent_layer() const noexcept { return latent_; }
  const nn::Dense<T>& output_layer() const noexcept { return output_; }

 private:
  SaeArchitecture arch_;
  SparsityConfig sparsity_;
  std::vector<Block> encoder_;
  nn::Dense<T> latent_;
  std::vector<Block> decoder_;
  nn::Dense<T> output_;
};

struct EpochStats {
  std::size_t epoch = 0;
  double total = 0.0;
  double mse = 0.0;
  double pen = 0.0;
};

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 16;
  nn::OptimizerConfig optimizer{};
  std::uint64_t seed = 0;
  /// When set, epoch rows are appended to this CSV file.
  std::optional<std::string> log_path;
};

/// Mini-batch training of one autoencoder on the rows of `data`. Batches are
/// drawn from a seeded shuffle each epoch; a trailing batch of one row is
/// skipped because batch-norm needs two. Needs at least two rows.
template <typename T>
std::vector<EpochStats> sae_train(SparseAutoencoder<T>& sae, const Matrix<T>& data,
                                  const TrainConfig& config);

/// Writes `epoch,total,mse,pen` rows with a header.
void write_training_log(const std::string& path, std::span<const EpochStats> log);

}  // namespace sdiar
