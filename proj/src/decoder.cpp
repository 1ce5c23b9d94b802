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

#include "mtlseg/decoder.hpp"

#include "mtlseg/errors.hpp"

namespace mtlseg {

void DecoderConfig::validate() const {
  if (channels == 0) throw ConfigError("decoder channels must be positive");
  if (tasks < 2) throw ConfigError("decoder needs at least 2 tasks, got " + std::to_string(tasks));
  if (heads == 0 || channels % heads != 0)
    throw ConfigError("decoder channels " + std::to_string(channels) + " not divisible by " + std::to_string(heads) +
                      " heads");
  if (cross_reduction == 0) throw ConfigError("decoder cross_reduction must be positive");
  if (mlp_ratio == 0) throw ConfigError("decoder mlp_ratio must be positive");
}

template <typename Real>
MtlDecoder<Real>::MtlDecoder(const DecoderConfig& config, const std::array<std::size_t, 4>& encoder_dims,
                             ParamStore<Real>& store, Initializer& init)
    : config_(config) {
  config_.validate();
  const std::size_t c = config_.channels;
  for (std::size_t i = 0; i < 4; ++i)
    fuse_[i] = make_linear(store, init, "decoder.fuse" + std::to_string(i + 1), encoder_dims[i], c);
  for (std::size_t t = 0; t < config_.tasks; ++t)
    branch_.push_back(make_linear(store, init, "decoder.branch" + std::to_string(t + 1), 4 * c, c));
  if (config_.cross_attention) {
    for (std::size_t t = 0; t < config_.tasks; ++t)
      cross_.push_back(make_attention(store, init, "decoder.cross" + std::to_string(t + 1), c, config_.heads,
                                      config_.cross_reduction));
  }
  for (std::size_t t = 0; t < config_.tasks; ++t)
    ffn_.push_back(make_mix_ffn(store, init, "decoder.ffn" + std::to_string(t + 1), c, config_.mlp_ratio));
  for (std::size_t t = 0; t < config_.tasks; ++t)
    head_.push_back(make_linear(store, init, "decoder.head" + std::to_string(t + 1), c, 2));
}

template <typename Real>
Tensor<Real> MtlDecoder<Real>::fuse_mlp_layer(const FeaturePyramid<Real>& pyramid) const {
  const auto& f1 = pyramid.maps[0];
  if (f1.rank() != 3) throw DimensionError("fuse_mlp_layer: F1 must be a grid");
  const std::size_t h = f1.dim(0), w = f1.dim(1);
  std::vector<Tensor<Real>> parts;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& map = pyramid.maps[i];
    const std::size_t factor = std::size_t{1} << i;
    if (map.rank() != 3 || map.dim(0) * factor != h || map.dim(1) * factor != w)
      throw DimensionError("fuse_mlp_layer: F" + std::to_string(i + 1) + " " + shape_str(map.shape()) +
                           " does not match the 1/" + std::to_string(4 * factor) + " scale of F1 " +
                           shape_str(f1.shape()));
    auto projected = fuse_[i](map);
    parts.push_back(factor == 1 ? projected : ops::bilinear_upsample(projected, factor));
  }
  return ops::concat_lastdim(parts);
}

template <typename Real>
std::vector<Tensor<Real>> MtlDecoder<Real>::task_branch_init(const Tensor<Real>& fused) const {
  if (fused.cols() != 4 * config_.channels)
    throw DimensionError("task_branch_init: fused width " + std::to_string(fused.cols()) + " != 4c");
  std::vector<Tensor<Real>> branches;
  for (const auto& layer : branch_) branches.push_back(layer(fused));
  return branches;
}

template <typename Real>
std::vector<Tensor<Real>> MtlDecoder<Real>::cross_task_attention(const std::vector<Tensor<Real>>& branches,
                                                                 std::vector<AttentionRecord<Real>>* records) const {
  if (config_.tasks < 2 || branches.size() < 2)
    throw ConfigError("cross_task_attention needs at least 2 task branches");
  if (!config_.cross_attention) throw ConfigError("cross_task_attention: decoder built without cross attention");
  if (branches.size() != config_.tasks)
    throw DimensionError("cross_task_attention: " + std::to_string(branches.size()) + " branches for " +
                         std::to_string(config_.tasks) + " tasks");
  const std::size_t tasks = branches.size();
  std::vector<Tensor<Real>> queries;
  std::vector<KeyValue<Real>> kvs;
  for (std::size_t t = 0; t < tasks; ++t) {
    if (branches[t].shape() != branches[0].shape()) throw DimensionError("cross_task_attention: branch extents differ");
    const auto normed = cross_[t].norm(branches[t]);
    queries.push_back(cross_[t].query(normed));
    kvs.push_back(project_key_value(cross_[t], normed));
  }
  std::vector<Tensor<Real>> features;
  for (std::size_t t = 0; t < tasks; ++t) {
    Tensor<Real> total;
    for (std::size_t u = 0; u < tasks; ++u) {
      if (u == t) continue;
      std::vector<Tensor<Real>> head_weights;
      auto mixed = attend(queries[t], kvs[u], config_.heads, records ? &head_weights : nullptr);
      total = total.defined() ? ops::add(total, mixed) : mixed;
      if (records) {
        AttentionRecord<Real> rec;
        rec.task = t;
        rec.source = u;
        rec.grid_h = branches[t].dim(0);
        rec.grid_w = branches[t].dim(1);
        rec.reduced_h = kvs[u].keys.dim(0);
        rec.reduced_w = kvs[u].keys.dim(1);
        rec.reduction = config_.cross_reduction;
        rec.weights.assign(head_weights.front().numel(), Real(0));
        for (const auto& hw : head_weights) {
          const auto v = hw.data();
          for (std::size_t i = 0; i < v.size(); ++i) rec.weights[i] += v[i];
        }
        for (auto& v : rec.weights) v /= static_cast<Real>(head_weights.size());
        records->push_back(std::move(rec));
      }
    }
    features.push_back(cross_[t].proj(total));
  }
  return features;
}

template <typename Real>
std::vector<Tensor<Real>> MtlDecoder<Real>::multitask_block(const std::vector<Tensor<Real>>& branches,
                                                            std::vector<AttentionRecord<Real>>* records) const {
  std::vector<Tensor<Real>> fused = branches;
  if (config_.cross_attention) {
    const auto cross = cross_task_attention(branches, records);
    for (std::size_t t = 0; t < fused.size(); ++t) fused[t] = ops::add(branches[t], cross[t]);
  }
  std::vector<Tensor<Real>> out;
  for (std::size_t t = 0; t < fused.size(); ++t) out.push_back(mix_ffn(ffn_[t], fused[t]));
  return out;
}

template <typename Real>
std::vector<Tensor<Real>> MtlDecoder<Real>::predict_heads(const std::vector<Tensor<Real>>& branches,
                                                          std::size_t upsample) const {
  if (branches.size() != head_.size())
    throw DimensionError("predict_heads: " + std::to_string(branches.size()) + " branches for " +
                         std::to_string(head_.size()) + " heads");
  std::vector<Tensor<Real>> logits;
  for (std::size_t t = 0; t < branches.size(); ++t) {
    auto z = head_[t](branches[t]);
    logits.push_back(upsample == 1 ? z : ops::bilinear_upsample(z, upsample));
  }
  return logits;
}

template <typename Real>
std::vector<Tensor<Real>> MtlDecoder<Real>::forward(const FeaturePyramid<Real>& pyramid,
                                                    std::vector<AttentionRecord<Real>>* records) const {
  return predict_heads(multitask_block(task_branch_init(fuse_mlp_layer(pyramid)), records));
}

template class MtlDecoder<float>;
template class MtlDecoder<double>;

}  // namespace mtlseg
