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
#include <optional>
#include <vector>

#include "sdiar/matrix.hpp"

namespace sdiar {

/// One-to-one assignment of rows to columns maximizing the summed score
/// (Hungarian method on the padded square problem). Entry r is the column
/// given to row r, or nullopt when there are more rows than columns.
std::vector<std::optional<std::size_t>> max_weight_assignment(const Matrix<double>& score);

}  // namespace sdiar
