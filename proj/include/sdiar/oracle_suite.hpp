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

// Built-in finite-difference suite over every differentiable piece of the
// model, shared by the `gradcheck` command and the test binaries.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace sdiar {

struct OracleSuiteConfig {
  std::size_t seeds = 10;
  double tolerance = 1e-4;
  double step = 1e-6;
  /// Negates the analytic gradient of every check; the suite must then fail.
  bool inject_sign_error = false;
};

struct OracleResult {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t seeds = 0;
  std::size_t checked = 0;
  std::string worst_param;
  bool passed = false;
};

std::vector<OracleResult> run_gradient_oracles(const OracleSuiteConfig& config = {});

}  // namespace sdiar
