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
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "mtlseg/model.hpp"

namespace mtlseg {

/// Square patches of side `patch` with stride patch/2; the last origin on each
/// axis is clamped so the final patch ends at the border.
struct TileGrid {
  std::size_t height = 0, width = 0, patch = 0;
  std::vector<std::size_t> row_origins, col_origins;

  std::size_t size() const { return row_origins.size() * col_origins.size(); }
  /// Row-major enumeration: patch i has origin (row_origins[i / cols], col_origins[i % cols]).
  std::pair<std::size_t, std::size_t> origin(std::size_t i) const;
};

/// Throws ArgumentError when `patch` is zero, odd, or larger than either extent.
TileGrid make_grid(std::size_t height, std::size_t width, std::size_t patch);

/// Binary masks (patch * patch) for every task of one patch.
using PatchPrediction = std::vector<std::vector<std::uint8_t>>;

/// Label of each pixel: the highest task index + 1 that any covering patch
/// marked, 0 when none did. Task order is the priority order, so with tasks
/// {line, gap} a pixel is gap over line over background. Throws ArgumentError
/// when the prediction count or any mask size disagrees with the grid.
std::vector<std::uint8_t> merge_priority(const std::vector<PatchPrediction>& predictions, const TileGrid& grid);

/// Same rule within one image: label = highest task whose mask is set.
std::vector<std::uint8_t> priority_labels(const std::vector<std::vector<std::uint8_t>>& masks);

/// Topology-preserving thinning to a 1-px skeleton. Zhang-Suen subiteration
/// candidates are deleted one at a time only when they are simple points and
/// not endpoints, repeated to a fixed point, followed by removal of simple
/// pixels from any remaining 2x2 foreground block.
std::vector<std::uint8_t> skeletonize(std::span<const std::uint8_t> mask, std::size_t height, std::size_t width);

/// Maps an RGB patch (patch * patch * 3 bytes) to per-task binary masks.
using PatchPredictor = std::function<PatchPrediction(std::span<const std::uint8_t> rgb, std::size_t patch)>;

/// Predictor that runs `model` without gradient tracking and applies argmax.
template <typename Real>
PatchPredictor model_predictor(const MultiTaskSegmenter<Real>& model);

struct TiledResult {
  std::size_t height = 0, width = 0, tasks = 0;
  std::vector<std::uint8_t> labels;                  // 0 = background, k + 1 = task k
  std::vector<std::vector<std::uint8_t>> skeletons;  // per task, skeleton of labels == k + 1
};

/// Splits, predicts every patch (in parallel), merges with priority and
/// skeletonizes each class.
TiledResult infer_full(std::span<const std::uint8_t> rgb, std::size_t height, std::size_t width, std::size_t patch,
                       std::size_t tasks, const PatchPredictor& predictor);

/// Grey level of label k among `tasks` foreground labels: {0, 128, 255} for two tasks.
std::uint8_t label_grey(std::uint8_t label, std::size_t tasks);

}  // namespace mtlseg
