/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 mtlseg contributors. All rights reserved.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mtlseg/decoder.hpp"

namespace mtlseg {

/// Cross-attention distribution of one query pixel on the branch grid.
struct AttentionMap {
  std::size_t height = 0, width = 0;
  std::vector<double> raw;         // attention weight of the covering reduced cell
  std::vector<double> normalized;  // min-max scaled to [0, 1]; a flat map is all 0

  std::vector<std::uint8_t> to_grey() const;
};

/// Selects the attention row of grid pixel (row, col), reshapes it to the
/// reduced grid and upsamples by nearest neighbour to the branch grid. Throws
/// ArgumentError when the pixel lies outside the grid.
template <typename Real>
AttentionMap export_attention(const AttentionRecord<Real>& record, std::size_t row, std::size_t col);

}  // namespace mtlseg
