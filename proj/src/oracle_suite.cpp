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

#include "sdiar/oracle_suite.hpp"

#include <functional>
#include <random>

#include "sdiar/mix_sae.hpp"
#include "sdiar/nn.hpp"
#include "sdiar/optim.hpp"
#include "sdiar/sae.hpp"
#include "sdiar/seed.hpp"

namespace sdiar {

namespace {

using Params = std::vector<nn::ParamRef<double>>;
using Check = std::function<nn::GradCheckResult(std::uint64_t seed, double step, bool flip)>;

Matrix<double> random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix<double> m(r, c);
  for (auto& v : m.flat()) v = normal(rng);
  return m;
}

double dot(const Matrix<double>& a, const Matrix<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a.flat()[i] * b.flat()[i];
  return acc;
}

nn::GradCheckResult checked(const std::function<double(bool)>& eval, const Params& params,
                            double step, bool flip) {
  if (!flip) return nn::grad_check(eval, params, step);
  auto negated = [&](bool backward) {
    const double v = eval(backward);
    if (backward) {
      for (const auto& p : params) {
        for (auto& g : p.grad) g = -g;
      }
    }
    return v;
  };
  return nn::grad_check(negated, params, step);
}

nn::ParamRef<double> input_param(Matrix<double>& x, std::vector<double>& grad) {
  grad.assign(x.size(), 0.0);
  return {"input", x.flat(), grad};
}

nn::GradCheckResult dense_check(std::uint64_t seed, double step, bool flip) {
  std::mt19937_64 rng(seed);
  nn::Dense<double> layer(4, 3, true, rng);
  Matrix<double> x = random_matrix(5, 4, rng);
  const Matrix<double> r = random_matrix(5, 3, rng);
  std::vector<double> gx;
  Params params;
  layer.collect_params("dense", params);
  params.push_back(input_param(x, gx));
  auto eval = [&](bool backward) {
    const Matrix<double> y = layer.forward(x);
    if (backward) {
      layer.zero_grad();
      const Matrix<double> dx = layer.backward(r);
      std::copy(dx.flat().begin(), dx.flat().end(), gx.begin());
    }
    return dot(y, r);
  };
  return checked(eval, params, step, flip);
}

nn::GradCheckResult batchnorm_check(std::uint64_t seed, double step, bool flip) {
  std::mt19937_64 rng(seed);
  nn::BatchNorm<double> bn(3);
  std::normal_distribution<double> normal;
  for (auto& g : bn.gamma()) g = 1.0 + 0.5 * normal(rng);
  for (auto& b : bn.beta()) b = normal(rng);
  Matrix<double> x = random_matrix(5, 3, rng);
  const Matrix<double> r = random_matrix(5, 3, rng);
  std::vector<double> gx;
  Params params;
  bn.collect_params("bn", params);
  params.push_back(input_param(x, gx));
  auto eval = [&](bool backward) {
    const Matrix<double> y = bn.forward(x);
    if (backward) {
      bn.zero_grad();
      const Matrix<double> dx = bn.backward(r);
      std::copy(dx.flat().begin(), dx.flat().end(), gx.begin());
    }
    return dot(y, r);
  };
  return checked(eval, params, step, flip);
}

nn::GradCheckResult activation_check(std::uint64_t seed, double step, bool flip) {
  std::mt19937_64 rng(seed);
  Matrix<double> x = random_matrix(5, 4, rng);
  const Matrix<double> r = random_matrix(5, 4, rng);
  nn::LeakyRelu<double> act;
  std::vector<double> gx;
  Params params{input_param(x, gx)};
  auto eval = [&](bool backward) {
    const Matrix<double> y = act.forward(x);
    const Matrix<double> p = nn::softmax_rows(y);
    if (backward) {
      const Matrix<double> dx = act.backward(nn::softmax_backward(p, r));
      std::copy(dx.flat().begin(), dx.flat().end(), gx.begin());
    }
    return dot(p, r);
  };
  return checked(eval, params, step, flip);
}

SaeArchitecture small_arch(std::size_t input, std::vector<std::size_t> hidden, std::size_t latent) {
  SaeArchitecture a;
  a.input_dim = input;
  a.encoder_hidden = std::move(hidden);
  a.latent_dim = latent;
  return a;
}

enum class SaeTerm { kMse, kPen, kTotal };

nn::GradCheckResult sae_check(std::uint64_t seed, double step, bool flip, SaeTerm term,
                              const SaeArchitecture& arch) {
  std::mt19937_64 rng(seed);
  SparsityConfig sp;
  if (term == SaeTerm::kMse) sp.beta = 0.0;
  if (term == SaeTerm::kPen) sp.beta = 1.0;
  SparseAutoencoder<double> sae(arch, sp, rng);
  const Matrix<double> x = random_matrix(5, arch.input_dim, rng);
  Params params;
  sae.collect_params("sae", params);
  auto eval = [&](bool backward) {
    if (backward) sae.zero_grad();
    if (term != SaeTerm::kPen) return sae.loss(x, backward).total;
    const SaeOutput<double> out = sae.forward(x);
    std::vector<std::vector<double>> rho_hat;
    for (const auto& a : out.activations) rho_hat.push_back(average_activation(a, sp.clamp_eps));
    if (backward) {
      const Matrix<double> zero(out.reconstruction.rows(), out.reconstruction.cols());
      sae.backward(zero, penalty_gradients<double>(out.activations, sp));
    }
    return kl_penalty(sp.rho, rho_hat);
  };
  return checked(eval, params, step, flip);
}

MixSaeConfig tiny_mix(double alpha, std::size_t gate_hidden) {
  MixSaeConfig c;
  c.k = 2;
  c.input_dim = 6;
  c.encoder_hidden = {4};
  c.latent_dim = 2;
  c.alpha = alpha;
  c.gate_hidden = gate_hidden;
  c.gate_init = GateInit::kGlorot;
  return c;
}

nn::GradCheckResult mix_check(std::uint64_t seed, double step, bool flip, double alpha,
                              std::size_t gate_hidden) {
  MixSae<double> model(tiny_mix(alpha, gate_hidden), seed);
  std::mt19937_64 rng(derive_seed(seed, 1));
  const Matrix<double> x = random_matrix(6, 6, rng, 0.5);
  const std::vector<std::size_t> labels{0, 1, 1, 0, 1, 0};
  Params params;
  model.collect_params(params);
  auto eval = [&](bool backward) {
    if (backward) model.zero_grad();
    return model.loss(x, labels, backward).total;
  };
  return checked(eval, params, step, flip);
}

nn::GradCheckResult ent_check(std::uint64_t seed, double step, bool flip) {
  std::mt19937_64 rng(seed);
  GatingProjection<double> gate(6, 3, 0, rng);
  const Matrix<double> x = random_matrix(6, 6, rng);
  const std::vector<std::size_t> labels{0, 1, 2, 2, 1, 0};
  Params params;
  gate.collect_params("gate", params);
  auto eval = [&](bool backward) {
    const Matrix<double> p = gate.forward(x);
    if (backward) {
      gate.zero_grad();
      gate.backward(pseudo_label_grad(p, labels));
    }
    return pseudo_label_loss(p, labels);
  };
  return checked(eval, params, step, flip);
}

}  // namespace

std::vector<OracleResult> run_gradient_oracles(const OracleSuiteConfig& config) {
  const std::vector<std::pair<std::string, Check>> checks{
      {"dense", dense_check},
      {"batchnorm", batchnorm_check},
      {"leaky_relu+softmax", activation_check},
      {"L_MSE", [](auto s, double h, bool f) {
         return sae_check(s, h, f, SaeTerm::kMse, small_arch(3, {4}, 2));
       }},
      {"L_pen", [](auto s, double h, bool f) {
         return sae_check(s, h, f, SaeTerm::kPen, small_arch(6, {4}, 2));
       }},
      {"L_SAE", [](auto s, double h, bool f) {
         return sae_check(s, h, f, SaeTerm::kTotal, small_arch(6, {4}, 2));
       }},
      {"L_rec", [](auto s, double h, bool f) { return mix_check(s, h, f, 0.0, 0); }},
      {"L_ent", ent_check},
      {"L_main", [](auto s, double h, bool f) { return mix_check(s, h, f, 1.0, 0); }},
      {"L_main(hidden gate)", [](auto s, double h, bool f) { return mix_check(s, h, f, 1.0, 4); }},
  };
  std::vector<OracleResult> results;
  for (std::size_t c = 0; c < checks.size(); ++c) {
    OracleResult r;
    r.name = checks[c].first;
    for (std::size_t s = 0; s < config.seeds; ++s) {
      const auto g = checks[c].second(derive_seed(s, 100 + c), config.step, config.inject_sign_error);
      r.checked += g.checked;
      if (s == 0 || g.max_rel_error > r.max_rel_error) {
        r.max_rel_error = g.max_rel_error;
        r.worst_param = g.worst_param;
      }
      ++r.seeds;
    }
    r.passed = r.max_rel_error < config.tolerance;
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace sdiar
