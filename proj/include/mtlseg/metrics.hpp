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
#include <string>
#include <vector>

#include "mtlseg/data.hpp"

namespace mtlseg {

/// Pixel counts for one class of a label mask.
struct SegCounts {
  std::size_t tp = 0, fp = 0, fn = 0;

  SegCounts& operator+=(const SegCounts& o);
  bool operator==(const SegCounts&) const = default;
};

struct SegScores {
  double precision = 0, recall = 0, f1 = 0, iou = 0;
  bool empty = false;  // neither mask contains the class; scores are 1 by convention
};

/// Counts pixels with label `cls` in pred and gt. Throws DimensionError on size mismatch.
SegCounts seg_counts(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt, std::uint8_t cls);

SegScores seg_scores(const SegCounts& counts);

/// seg_scores(seg_counts(...)).
SegScores seg_metrics(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt, std::uint8_t cls);

/// Squared Euclidean distance from every pixel to the nearest nonzero pixel
/// of `mask` (exact, separable two-pass transform). Pixels of an empty mask
/// get +infinity.
std::vector<double> squared_distance_transform(std::span<const std::uint8_t> mask, std::size_t height, std::size_t width);

/// Distance-tolerant thin-structure counts.
struct DetectionCounts {
  std::size_t pred = 0;     // |pred|
  std::size_t tp = 0;       // pred pixels within d of gt
  std::size_t gt = 0;       // |gt|
  std::size_t matched = 0;  // gt pixels within d of pred

  DetectionCounts& operator+=(const DetectionCounts& o);
  bool operator==(const DetectionCounts&) const = default;
};

struct DetectionScores {
  double precision = 0, recall = 0, f1 = 0;
  bool empty = false;              // both empty; scores are 1 by convention
  bool recall_undefined = false;   // empty gt with predictions; recall reported as 0
  bool precision_undefined = false;  // empty prediction with nonempty gt; precision reported as 0
};

DetectionCounts detection_counts(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt, std::size_t height,
                                 std::size_t width, double d);

DetectionScores detection_scores(const DetectionCounts& counts);

/// detection_scores(detection_counts(...)).
DetectionScores detection_f1(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt, std::size_t height,
                             std::size_t width, double d = 3.0);

/// Micro-averaged results of one task (label k + 1).
struct ClassReport {
  std::string name;
  bool thin = false;
  SegCounts seg;       // against dilated ground truth for thin tasks, raw otherwise
  SegCounts seg_raw;   // against raw ground truth
  DetectionCounts det; // thin tasks only: skeleton of the prediction vs 1-px ground truth
};

struct MetricsReport {
  std::size_t samples = 0;
  double tolerance = 3.0;
  std::vector<ClassReport> classes;

  /// UTF-8 key=value lines, one metric per line.
  std::string to_key_values() const;
  /// Header and value rows, tab separated: F1 and IoU per class.
  std::string tsv_header() const;
  std::string tsv_row() const;
};

/// Merged label mask (0 = background, k + 1 = task k) for one sample.
using SamplePredictor = std::function<std::vector<std::uint8_t>(const Sample&)>;

struct EvalOptions {
  double tolerance = 3.0;
  std::size_t dilation = 6;
};

/// Accumulates pixel counts over every sample, then forms ratios. Throws
/// ArgumentError for an empty dataset.
MetricsReport evaluate_dataset(const Dataset& dataset, const SamplePredictor& predictor, const EvalOptions& options = {});

}  // namespace mtlseg
