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

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sdiar/nn.hpp"

namespace sdiar::nn {

enum class OptimizerKind { kAdam, kSgd };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double weight_decay = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam (or plain SGD) with decoupled weight decay:
/// p <- p - lr*wd*p, then the optimizer delta. Moments are keyed by the
/// position of each parameter in the list passed to step(), so callers must
/// pass parameters in a stable order.
template <typename T>
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config = {});

  /// Throws NumericError naming the parameter when a gradient is not finite.
  void step(std::span<const ParamRef<T>> params);

  std::size_t step_count() const noexcept { return step_count_; }
  const OptimizerConfig& config() const noexcept { return config_; }

 private:
  OptimizerConfig config_;
  std::size_t step_count_ = 0;
  std::vector<std::vector<T>> m_, v_;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

/// Compares analytic gradients against central differences.
///
/// `eval(true)` must zero gradients, run forward and backward and return the
/// loss; `eval(false)` runs forward only. Relative error per entry is
/// |a - n| / max(|a|, |n|, 1e-8).
GradCheckResult grad_check(const std::function<double(bool)>& eval,
                           std::span<const ParamRef<double>> params, double step = 1e-6);

}  // namespace sdiar::nn
