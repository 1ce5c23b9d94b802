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

#include "mtlseg/attention_map.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mtlseg/errors.hpp"

namespace mtlseg {

std::vector<std::uint8_t> AttentionMap::to_grey() const {
  std::vector<std::uint8_t> out(normalized.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>(std::lround(std::clamp(normalized[i], 0.0, 1.0) * 255.0));
  return out;
}

template <typename Real>
AttentionMap export_attention(const AttentionRecord<Real>& record, std::size_t row, std::size_t col) {
  if (row >= record.grid_h || col >= record.grid_w)
    throw ArgumentError("pixel (" + std::to_string(row) + "," + std::to_string(col) + ") outside the " +
                        std::to_string(record.grid_h) + "x" + std::to_string(record.grid_w) + " attention grid");
  const std::size_t n_kv = record.reduced_h * record.reduced_w;
  if (record.weights.size() != record.grid_h * record.grid_w * n_kv)
    throw DimensionError("attention record has " + std::to_string(record.weights.size()) + " weights, expected " +
                         std::to_string(record.grid_h * record.grid_w * n_kv));
  const std::size_t r = record.reduction;
  const Real* w = record.weights.data() + (row * record.grid_w + col) * n_kv;
  AttentionMap map{record.grid_h, record.grid_w, std::vector<double>(record.grid_h * record.grid_w), {}};
  for (std::size_t y = 0; y < map.height; ++y)
    for (std::size_t x = 0; x < map.width; ++x) {
      const std::size_t ry = std::min(y / r, record.reduced_h - 1), rx = std::min(x / r, record.reduced_w - 1);
      map.raw[y * map.width + x] = static_cast<double>(w[ry * record.reduced_w + rx]);
    }
  const auto [lo, hi] = std::minmax_element(map.raw.begin(), map.raw.end());
  const double range = *hi - *lo;
  map.normalized.resize(map.raw.size());
  for (std::size_t i = 0; i < map.raw.size(); ++i) map.normalized[i] = range > 0 ? (map.raw[i] - *lo) / range : 0.0;
  return map;
}

template AttentionMap export_attention(const AttentionRecord<float>&, std::size_t, std::size_t);
template AttentionMap export_attention(const AttentionRecord<double>&, std::size_t, std::size_t);

}  // namespace mtlseg
