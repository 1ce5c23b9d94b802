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

#include <array>
#include <cstddef>
#include <vector>

#include "mtlseg/encoder.hpp"
#include "mtlseg/layers.hpp"

namespace mtlseg {

struct DecoderConfig {
  std::size_t channels = 16;
  std::size_t tasks = 2;
  std::size_t heads = 1;
  std::size_t cross_reduction = 1;
  std::size_t mlp_ratio = 4;
  /// false drops the cross-task exchange: each branch runs only its own
  /// Mix-FFN, as in a plain SegFormer-style decoder per task.
  bool cross_attention = true;

  void validate() const;
  bool operator==(const DecoderConfig&) const = default;
};

/// Head-averaged cross-attention weights of task `task` (queries) over task
/// `source` (keys/values). Row i is the distribution of branch-grid pixel i
/// over the reduced grid.
template <typename Real>
struct AttentionRecord {
  std::size_t task = 0;
  std::size_t source = 0;
  std::size_t grid_h = 0, grid_w = 0;
  std::size_t reduced_h = 0, reduced_w = 0;
  std::size_t reduction = 1;
  std::vector<Real> weights;  // [grid_h * grid_w, reduced_h * reduced_w]
};

/// MLP fusion of the pyramid, one branch per task, cross-task attention with
/// residual fusion, per-task Mix-FFN, and a two-class head per task.
template <typename Real>
class MtlDecoder {
 public:
  MtlDecoder(const DecoderConfig& config, const std::array<std::size_t, 4>& encoder_dims, ParamStore<Real>& store,
             Initializer& init);

  /// Projects each map to c channels, upsamples to the 1/4 grid and
  /// concatenates F1..F4 into [h/4, w/4, 4c].
  Tensor<Real> fuse_mlp_layer(const FeaturePyramid<Real>& pyramid) const;

  /// One pointwise 4c -> c projection per task.
  std::vector<Tensor<Real>> task_branch_init(const Tensor<Real>& fused) const;

  /// For each task t: proj_t( sum_{u != t} softmax(Q_t K_u^T / sqrt(d)) V_u ).
  std::vector<Tensor<Real>> cross_task_attention(const std::vector<Tensor<Real>>& branches,
                                                 std::vector<AttentionRecord<Real>>* records = nullptr) const;

  /// F_t + cross_t, then the task's Mix-FFN.
  std::vector<Tensor<Real>> multitask_block(const std::vector<Tensor<Real>>& branches,
                                            std::vector<AttentionRecord<Real>>* records = nullptr) const;

  /// Per-task [h/4, w/4, 2] logits, bilinearly upsampled by `upsample`.
  std::vector<Tensor<Real>> predict_heads(const std::vector<Tensor<Real>>& branches, std::size_t upsample = 4) const;

  std::vector<Tensor<Real>> forward(const FeaturePyramid<Real>& pyramid,
                                    std::vector<AttentionRecord<Real>>* records = nullptr) const;

  const DecoderConfig& config() const { return config_; }
  const std::vector<AttentionLayer<Real>>& cross_layers() const { return cross_; }
  const std::vector<MixFfnLayer<Real>>& ffn_layers() const { return ffn_; }
  const std::vector<LinearLayer<Real>>& branch_layers() const { return branch_; }
  const std::vector<LinearLayer<Real>>& head_layers() const { return head_; }

 private:
  DecoderConfig config_;
  std::array<LinearLayer<Real>, 4> fuse_;
  std::vector<LinearLayer<Real>> branch_;
  std::vector<AttentionLayer<Real>> cross_;
  std::vector<MixFfnLayer<Real>> ffn_;
  std::vector<LinearLayer<Real>> head_;
};

extern template class MtlDecoder<float>;
extern template class MtlDecoder<double>;

}  // namespace mtlseg
