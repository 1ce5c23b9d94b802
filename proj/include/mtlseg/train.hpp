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
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mtlseg/data.hpp"
#include "mtlseg/gradcheck.hpp"
#include "mtlseg/metrics.hpp"
#include "mtlseg/model.hpp"

namespace mtlseg {

struct TrainConfig {
  std::size_t iterations = 2000;
  std::size_t batch_size = 2;
  double base_lr = 6e-5;
  double poly_power = 1.0;
  double weight_decay = 0.01;
  std::uint64_t seed = 0;
  std::string encoder = "t0";
  std::size_t decoder_channels = 16;
  std::size_t decoder_heads = 1;
  std::size_t cross_reduction = 1;
  bool cross_attention = true;
  std::size_t dilation = 6;
  std::string data;
  std::string out_dir;  // empty: no files written
  std::size_t checkpoint_interval = 0;  // 0: only the final checkpoint
  std::size_t log_interval = 50;

  void validate() const;
  ModelConfig model_config(std::size_t tasks) const;
};

/// Parses `key = value` lines with `#` comments. Unknown keys and malformed
/// values throw ConfigError naming `source` and the line.
TrainConfig parse_train_config(const std::string& text, const std::string& source = "<config>");
TrainConfig load_train_config(const std::filesystem::path& path);

/// Sum over tasks of the mean two-class cross-entropy. Throws ArgumentError
/// for labels outside {0, 1} or a task count mismatch.
template <typename Real>
Tensor<Real> mtl_loss(const std::vector<Tensor<Real>>& logits, const std::vector<std::span<const std::uint8_t>>& labels);

struct LogRecord {
  std::size_t iteration = 0;
  double lr = 0;
  double loss = 0;
  std::vector<double> task_losses;
  double seconds = 0;
};

struct RunLog {
  std::vector<std::string> task_names;
  std::vector<LogRecord> records;
  double initial_loss = 0;  // mean over the training set before the first step
  double final_loss = 0;    // mean over the training set after the last step

  /// One key=value line per record; `with_time` adds wall-clock seconds.
  static std::string format(const LogRecord& r, const std::vector<std::string>& task_names, bool with_time = true);
};

/// Training labels: thin tasks dilated with the configured element.
std::vector<std::vector<std::vector<std::uint8_t>>> training_labels(const Dataset& dataset, std::size_t dilation);

/// Mean mtl_loss over every sample, without gradient tracking.
template <typename Real>
double dataset_loss(const MultiTaskSegmenter<Real>& model, const Dataset& dataset,
                    const std::vector<std::vector<std::vector<std::uint8_t>>>& labels);

struct TrainResult {
  std::unique_ptr<MultiTaskSegmenter<float>> model;
  RunLog log;
};

/// AdamW with the poly schedule over a seeded shuffling stream; each step
/// averages the loss of `batch_size` samples. When `out_dir` is set, writes
/// run.log, ckpt_<iter>.ckpt every checkpoint_interval iterations and
/// last.ckpt. A NumericError saves last_good.ckpt (when out_dir is set)
/// before propagating. Log lines are also streamed to `log` when given.
TrainResult train(const TrainConfig& config, const Dataset& dataset, std::ostream* log = nullptr);

/// Whole-image prediction: per-task argmax merged with task priority.
template <typename Real>
SamplePredictor direct_predictor(const MultiTaskSegmenter<Real>& model);

/// Tiled prediction with the given patch size.
template <typename Real>
SamplePredictor tiled_predictor(const MultiTaskSegmenter<Real>& model, std::size_t patch);

struct AblationRow {
  std::string variant;  // "mtl" or "single"
  std::size_t parameters = 0;
  std::vector<double> f1, iou;  // per task, mean over seeds
  std::vector<MetricsReport> per_seed;
};

struct AblationResult {
  std::vector<std::string> task_names;
  std::vector<std::uint64_t> seeds;
  std::vector<AblationRow> rows;  // mtl then single

  /// Tab-separated table: variant, parameters, then F1 and IoU per task.
  std::string table() const;
};

/// Trains the cross-attention decoder and the ablation without it on
/// `train_set` for every seed, then evaluates both on `eval_set`.
AblationResult ablate_decoder(const TrainConfig& config, const Dataset& train_set, const Dataset& eval_set,
                              const std::vector<std::uint64_t>& seeds, std::ostream* log = nullptr);

struct ModelGradCheckOptions {
  std::size_t size = 32;
  std::uint64_t seed = 0;
  std::size_t coords_per_tensor = 3;
  double eps = 1e-4;
  /// Uniform noise added to every parameter first. The default
  /// initialisation leaves deep gradients near 1e-8, too small for central
  /// differences to resolve in relative terms.
  double perturbation = 0.2;
};

struct ModelGradCheck {
  /// Every parameter except attention key biases.
  GradCheckReport report;
  /// Key biases cannot change any softmax row, so their gradient is zero;
  /// these are the largest analytic magnitude and finite-difference residual.
  double key_bias_max_grad = 0;
  double key_bias_max_abs_error = 0;
};

/// Full encoder, decoder and loss in double precision on a random image with
/// random labels.
ModelGradCheck check_model_gradients(const ModelGradCheckOptions& options = {});

}  // namespace mtlseg
