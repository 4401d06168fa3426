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

#include "sdiar/optim.hpp"

#include <algorithm>
#include <cmath>

#include "sdiar/error.hpp"

namespace sdiar::nn {

template <typename T>
Optimizer<T>::Optimizer(OptimizerConfig config) : config_(config) {
  if (!(config_.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (config_.weight_decay < 0.0) throw ConfigError("weight decay must be non-negative");
}

template <typename T>
void Optimizer<T>::step(std::span<const ParamRef<T>> params) {
  for (const auto& p : params) {
    if (p.value.size() != p.grad.size()) {
      throw ConfigError("parameter " + p.name + " and its gradient differ in size");
    }
    for (std::size_t i = 0; i < p.grad.size(); ++i) {
      if (!std::isfinite(p.grad[i])) {
        throw NumericError("non-finite gradient in " + p.name + " at index " + std::to_string(i));
      }
    }
  }
  if (config_.kind == OptimizerKind::kAdam) {
    if (m_.empty()) {
      for (const auto& p : params) {
        m_.emplace_back(p.value.size(), T(0));
        v_.emplace_back(p.value.size(), T(0));
      }
    }
    if (m_.size() != params.size()) throw ConfigError("optimizer parameter list changed between steps");
  }
  ++step_count_;
  const double lr = config_.learning_rate;
  const double decay = 1.0 - lr * config_.weight_decay;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));
  const T b1 = static_cast<T>(config_.beta1), b2 = static_cast<T>(config_.beta2);

  for (std::size_t k = 0; k < params.size(); ++k) {
    auto value = params[k].value;
    auto grad = params[k].grad;
    if (config_.weight_decay != 0.0) {
      for (auto& w : value) w = static_cast<T>(w * decay);
    }
    if (config_.kind == OptimizerKind::kSgd) {
      for (std::size_t i = 0; i < value.size(); ++i) value[i] -= static_cast<T>(lr * grad[i]);
      continue;
    }
    auto& m = m_[k];
    auto& v = v_[k];
    if (m.size() != value.size()) throw ConfigError("optimizer moment shape mismatch for " + params[k].name);
    for (std::size_t i = 0; i < value.size(); ++i) {
      const T g = grad[i];
      m[i] = b1 * m[i] + (T(1) - b1) * g;
      v[i] = b2 * v[i] + (T(1) - b2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      value[i] -= static_cast<T>(lr * m_hat / (std::sqrt(v_hat) + config_.eps));
    }
  }
}

template class Optimizer<float>;
template class Optimizer<double>;

GradCheckResult grad_check(const std::function<double(bool)>& eval,
                           std::span<const ParamRef<double>> params, double step) {
  eval(true);
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.emplace_back(p.grad.begin(), p.grad.end());

  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto value = params[k].value;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double orig = value[i];
      value[i] = orig + step;
      const double up = eval(false);
      value[i] = orig - step;
      const double down = eval(false);
      value[i] = orig;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++result.checked;
      if (rel > result.max_rel_error || result.checked == 1) {
        result.max_rel_error = rel;
        result.worst_param = params[k].name;
        result.worst_index = i;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace sdiar::nn
