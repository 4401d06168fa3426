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

// Checkpoint layout (little-endian):
//   "SDCK" | u8 version (1)
//   config: u32 k, u32 input_dim, u32 latent_dim, u32 depth, depth x u32 widths,
//           u32 gate_hidden, u8 reduction, u8 gate_init, f64 rho, beta, clamp_eps, bn_eps,
//           bn_momentum, alpha, u32 tau, main_epochs, pretrain_epochs,
//           cluster_epochs, batch_size, kmeans_restarts, u8 optimizer kind, f64 lr, wd, beta1,
//           beta2, eps
//   k experts: per block dense then batch-norm, latent dense, decoder blocks, output dense
//   gate: u8 has_hidden, [hidden dense], output dense
// dense: u32 rows, u32 cols, u8 has_bias, rows*cols f32, [rows f32]
// batch-norm: u32 dim, gamma, beta, running_mean, running_var as f32

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "binary_io.hpp"
#include "sdiar/error.hpp"
#include "sdiar/mix_sae.hpp"

namespace sdiar {

namespace {

constexpr char kMagic[4] = {'S', 'D', 'C', 'K'};
constexpr std::uint8_t kVersion = 1;

template <typename T>
void put_dense(std::ostream& out, const nn::Dense<T>& d) {
  binio::put_u32(out, static_cast<std::uint32_t>(d.out_dim()));
  binio::put_u32(out, static_cast<std::uint32_t>(d.in_dim()));
  binio::put_u8(out, d.has_bias() ? 1 : 0);
  for (T v : d.weights().flat()) binio::put_f32(out, static_cast<float>(v));
  for (T v : d.bias()) binio::put_f32(out, static_cast<float>(v));
}

template <typename T>
void put_vec(std::ostream& out, const std::vector<T>& v) {
  for (T x : v) binio::put_f32(out, static_cast<float>(x));
}

template <typename T>
void put_norm(std::ostream& out, const nn::BatchNorm<T>& b) {
  binio::put_u32(out, static_cast<std::uint32_t>(b.dim()));
  put_vec(out, b.gamma());
  put_vec(out, b.beta());
  put_vec(out, b.running_mean());
  put_vec(out, b.running_var());
}

template <typename T>
void get_dense(binio::Reader& r, nn::Dense<T>& d) {
  const std::uint32_t rows = r.u32();
  const std::uint32_t cols = r.u32();
  const bool bias = r.u8() != 0;
  if (rows != d.out_dim() || cols != d.in_dim() || bias != d.has_bias()) {
    throw FormatError(FormatError::Kind::kInvalid, "checkpoint: dense layer shape mismatch");
  }
  for (auto& v : d.weights().flat()) v = static_cast<T>(r.f32());
  for (auto& v : d.bias()) v = static_cast<T>(r.f32());
}

template <typename T>
void get_vec(binio::Reader& r, std::vector<T>& v) {
  for (auto& x : v) x = static_cast<T>(r.f32());
}

template <typename T>
void get_norm(binio::Reader& r, nn::BatchNorm<T>& b) {
  if (r.u32() != b.dim()) {
    throw FormatError(FormatError::Kind::kInvalid, "checkpoint: batch-norm shape mismatch");
  }
  get_vec(r, b.gamma());
  get_vec(r, b.beta());
  get_vec(r, b.running_mean());
  get_vec(r, b.running_var());
}

}  // namespace

template <typename T>
void save_checkpoint(const MixSae<T>& model, std::ostream& out) {
  const MixSaeConfig& c = model.config();
  out.write(kMagic, 4);
  binio::put_u8(out, kVersion);
  binio::put_u32(out, static_cast<std::uint32_t>(c.k));
  binio::put_u32(out, static_cast<std::uint32_t>(c.input_dim));
  binio::put_u32(out, static_cast<std::uint32_t>(c.architecture().latent_dim));
  binio::put_u32(out, static_cast<std::uint32_t>(c.encoder_hidden.size()));
  for (auto h : c.encoder_hidden) binio::put_u32(out, static_cast<std::uint32_t>(h));
  binio::put_u32(out, static_cast<std::uint32_t>(c.gate_hidden));
  binio::put_u8(out, c.reduction == ReconReduction::kMean ? 1 : 0);
  binio::put_u8(out, c.gate_init == GateInit::kGlorot ? 1 : 0);
  for (double v : {c.sparsity.rho, c.sparsity.beta, c.sparsity.clamp_eps, c.batch_norm.eps,
                   c.batch_norm.momentum, c.alpha}) {
    binio::put_f64(out, v);
  }
  for (auto v : {c.tau, c.main_epochs, c.pretrain_epochs, c.cluster_epochs, c.batch_size,
                 c.kmeans_restarts}) {
    binio::put_u32(out, static_cast<std::uint32_t>(v));
  }
  binio::put_u8(out, c.optimizer.kind == nn::OptimizerKind::kSgd ? 1 : 0);
  for (double v : {c.optimizer.learning_rate, c.optimizer.weight_decay, c.optimizer.beta1,
                   c.optimizer.beta2, c.optimizer.eps}) {
    binio::put_f64(out, v);
  }
  for (const auto& ae : model.autoencoders()) {
    for (const auto& b : ae.encoder()) {
      put_dense(out, b.dense);
      put_norm(out, b.norm);
    }
    put_dense(out, ae.latent_layer());
    for (const auto& b : ae.decoder()) {
      put_dense(out, b.dense);
      put_norm(out, b.norm);
    }
    put_dense(out, ae.output_layer());
  }
  binio::put_u8(out, model.gate().has_hidden() ? 1 : 0);
  if (model.gate().has_hidden()) put_dense(out, *model.gate().hidden_layer());
  put_dense(out, model.gate().output_layer());
  if (!out) throw DataError("checkpoint write failed");
}

template <typename T>
void save_checkpoint(const MixSae<T>& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open checkpoint for writing: " + path);
  save_checkpoint(model, out);
}

template <typename T>
MixSae<T> load_checkpoint(std::istream& in) {
  binio::Reader r(in, "checkpoint");
  char magic[4];
  r.bytes(magic, 4);
  if (!std::equal(magic, magic + 4, kMagic)) {
    throw FormatError(FormatError::Kind::kBadMagic, "checkpoint: bad magic");
  }
  const std::uint8_t version = r.u8();
  if (version != kVersion) {
    throw FormatError(FormatError::Kind::kUnknownVersion,
                      "checkpoint: unknown version " + std::to_string(version));
  }
  MixSaeConfig c;
  c.k = r.u32();
  c.input_dim = r.u32();
  c.latent_dim = r.u32();
  const std::uint32_t depth = r.u32();
  if (depth > 64) throw FormatError(FormatError::Kind::kInvalid, "checkpoint: implausible depth");
  c.encoder_hidden.resize(depth);
  for (auto& h : c.encoder_hidden) h = r.u32();
  c.gate_hidden = r.u32();
  c.reduction = r.u8() ? ReconReduction::kMean : ReconReduction::kSum;
  c.gate_init = r.u8() ? GateInit::kGlorot : GateInit::kZero;
  c.sparsity.rho = r.f64();
  c.sparsity.beta = r.f64();
  c.sparsity.clamp_eps = r.f64();
  c.batch_norm.eps = r.f64();
  c.batch_norm.momentum = r.f64();
  c.alpha = r.f64();
  c.tau = r.u32();
  c.main_epochs = r.u32();
  c.pretrain_epochs = r.u32();
  c.cluster_epochs = r.u32();
  c.batch_size = r.u32();
  c.kmeans_restarts = r.u32();
  c.optimizer.kind = r.u8() ? nn::OptimizerKind::kSgd : nn::OptimizerKind::kAdam;
  c.optimizer.learning_rate = r.f64();
  c.optimizer.weight_decay = r.f64();
  c.optimizer.beta1 = r.f64();
  c.optimizer.beta2 = r.f64();
  c.optimizer.eps = r.f64();

  MixSae<T> model;
  try {
    model = MixSae<T>(c, 0);
  } catch (const ConfigError& e) {
    throw FormatError(FormatError::Kind::kInvalid, std::string("checkpoint: ") + e.what());
  }
  for (auto& ae : model.autoencoders()) {
    for (auto& b : ae.encoder()) {
      get_dense(r, b.dense);
      get_norm(r, b.norm);
    }
    get_dense(r, ae.latent_layer());
    for (auto& b : ae.decoder()) {
      get_dense(r, b.dense);
      get_norm(r, b.norm);
    }
    get_dense(r, ae.output_layer());
  }
  const bool hidden = r.u8() != 0;
  if (hidden != model.gate().has_hidden()) {
    throw FormatError(FormatError::Kind::kInvalid, "checkpoint: gate layout mismatch");
  }
  if (hidden) get_dense(r, *model.gate().hidden_layer());
  get_dense(r, model.gate().output_layer());
  if (!r.at_end()) throw FormatError(FormatError::Kind::kInvalid, "checkpoint: trailing bytes");
  model.set_mode(nn::Mode::kEval);
  return model;
}

template <typename T>
MixSae<T> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  return load_checkpoint<T>(in);
}

template void save_checkpoint<float>(const MixSae<float>&, std::ostream&);
template void save_checkpoint<double>(const MixSae<double>&, std::ostream&);
template void save_checkpoint<float>(const MixSae<float>&, const std::string&);
template void save_checkpoint<double>(const MixSae<double>&, const std::string&);
template MixSae<float> load_checkpoint<float>(std::istream&);
template MixSae<double> load_checkpoint<double>(std::istream&);
template MixSae<float> load_checkpoint<float>(const std::string&);
template MixSae<double> load_checkpoint<double>(const std::string&);

}  // namespace sdiar
