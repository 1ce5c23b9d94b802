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
#include <string>
#include <vector>

#include "mtlseg/layers.hpp"

namespace mtlseg {

struct EncoderConfig {
  std::string name = "t0";
  std::array<std::size_t, 4> embed_dims{8, 16, 24, 32};
  std::array<std::size_t, 4> depths{1, 1, 1, 1};
  std::array<std::size_t, 4> heads{1, 1, 2, 2};
  std::array<std::size_t, 4> reductions{4, 2, 1, 1};
  std::size_t mlp_ratio = 4;

  /// SegFormer-B0 widths.
  static EncoderConfig b0();
  /// Small test configuration.
  static EncoderConfig t0();
  /// "b0" or "t0"; throws ConfigError otherwise.
  static EncoderConfig by_name(const std::string& name);

  void validate() const;
  /// Checks that every stage grid of an h x w input is tiled by its reduction.
  void validate_input(std::size_t h, std::size_t w) const;

  bool operator==(const EncoderConfig&) const = default;
};

/// Encoder outputs at 1/4, 1/8, 1/16 and 1/32 of the input resolution.
template <typename Real>
struct FeaturePyramid {
  std::array<Tensor<Real>, 4> maps;
};

template <typename Real>
struct PatchEmbedLayer {
  ConvLayer<Real> conv;
  NormLayer<Real> norm;
};

template <typename Real>
struct EncoderBlock {
  AttentionLayer<Real> attention;
  MixFfnLayer<Real> ffn;
};

template <typename Real>
struct EncoderStage {
  PatchEmbedLayer<Real> embed;
  std::vector<EncoderBlock<Real>> blocks;
};

/// 7x7 stride-4 convolution plus LayerNorm over an [h, w, 3] image; h and w
/// must be multiples of 32.
template <typename Real>
Tensor<Real> overlap_patch_embed(const PatchEmbedLayer<Real>& layer, const Tensor<Real>& image);

/// 3x3 stride-2 convolution plus LayerNorm; halves an even-sized grid.
template <typename Real>
Tensor<Real> overlap_patch_merge(const PatchEmbedLayer<Real>& layer, const Tensor<Real>& map);

template <typename Real>
class Encoder {
 public:
  Encoder(const EncoderConfig& config, ParamStore<Real>& store, Initializer& init);

  FeaturePyramid<Real> encode(const Tensor<Real>& image,
                              std::vector<Tensor<Real>>* attention_weights = nullptr) const;

  const EncoderConfig& config() const { return config_; }
  const std::array<EncoderStage<Real>, 4>& stages() const { return stages_; }

 private:
  EncoderConfig config_;
  std::array<EncoderStage<Real>, 4> stages_;
};

extern template class Encoder<float>;
extern template class Encoder<double>;

}  // namespace mtlseg
