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

#include "mtlseg/encoder.hpp"

#include "mtlseg/errors.hpp"

namespace mtlseg {

EncoderConfig EncoderConfig::b0() {
  EncoderConfig c;
  c.name = "b0";
  c.embed_dims = {32, 64, 160, 256};
  c.depths = {2, 2, 2, 2};
  c.heads = {1, 2, 5, 8};
  c.reductions = {8, 4, 2, 1};
  return c;
}

EncoderConfig EncoderConfig::t0() { return EncoderConfig{}; }

EncoderConfig EncoderConfig::by_name(const std::string& name) {
  if (name == "b0") return b0();
  if (name == "t0") return t0();
  throw ConfigError("unknown encoder config '" + name + "' (expected b0 or t0)");
}

void EncoderConfig::validate() const {
  for (std::size_t i = 0; i < 4; ++i) {
    if (embed_dims[i] == 0 || depths[i] == 0 || heads[i] == 0 || reductions[i] == 0)
      throw ConfigError("encoder stage " + std::to_string(i + 1) + ": all sizes must be positive");
    if (embed_dims[i] % heads[i] != 0)
      throw ConfigError("encoder stage " + std::to_string(i + 1) + ": width " + std::to_string(embed_dims[i]) +
                        " not divisible by " + std::to_string(heads[i]) + " heads");
  }
  if (mlp_ratio == 0) throw ConfigError("encoder mlp_ratio must be positive");
}

void EncoderConfig::validate_input(std::size_t h, std::size_t w) const {
  if (h == 0 || w == 0 || h % 32 != 0 || w % 32 != 0)
    throw ConfigError("input " + std::to_string(h) + "x" + std::to_string(w) + " is not a multiple of 32");
  for (std::size_t i = 0; i < 4; ++i) {
    const std::size_t stride = std::size_t{4} << i;
    if ((h / stride) % reductions[i] != 0 || (w / stride) % reductions[i] != 0)
      throw ConfigError("stage " + std::to_string(i + 1) + " grid " + std::to_string(h / stride) + "x" +
                        std::to_string(w / stride) + " is not tiled by reduction " + std::to_string(reductions[i]));
  }
}

template <typename Real>
Tensor<Real> overlap_patch_embed(const PatchEmbedLayer<Real>& layer, const Tensor<Real>& image) {
  if (image.rank() != 3) throw DimensionError("overlap_patch_embed: image must be [h, w, 3]");
  if (image.dim(0) % 32 != 0 || image.dim(1) % 32 != 0)
    throw ConfigError("overlap_patch_embed: image " + shape_str(image.shape()) + " extents must be multiples of 32");
  return layer.norm(layer.conv(image));
}

template <typename Real>
Tensor<Real> overlap_patch_merge(const PatchEmbedLayer<Real>& layer, const Tensor<Real>& map) {
  if (map.rank() != 3 || map.dim(0) % 2 != 0 || map.dim(1) % 2 != 0)
    throw DimensionError("overlap_patch_merge: grid " + shape_str(map.shape()) + " must have even extents");
  return layer.norm(layer.conv(map));
}

template <typename Real>
Encoder<Real>::Encoder(const EncoderConfig& config, ParamStore<Real>& store, Initializer& init) : config_(config) {
  config_.validate();
  std::size_t in_c = 3;
  for (std::size_t i = 0; i < 4; ++i) {
    const std::string prefix = "encoder.stage" + std::to_string(i + 1);
    const std::size_t c = config_.embed_dims[i];
    const ops::ConvSpec spec = i == 0 ? ops::ConvSpec{7, 4, 3, 1} : ops::ConvSpec{3, 2, 1, 1};
    auto& stage = stages_[i];
    stage.embed.conv = make_conv(store, init, prefix + ".embed.conv", in_c, c, spec);
    stage.embed.norm = make_norm(store, prefix + ".embed.norm", c);
    for (std::size_t b = 0; b < config_.depths[i]; ++b) {
      const std::string block = prefix + ".block" + std::to_string(b + 1);
      stage.blocks.push_back({make_attention(store, init, block + ".attn", c, config_.heads[i], config_.reductions[i]),
                              make_mix_ffn(store, init, block + ".ffn", c, config_.mlp_ratio)});
    }
    in_c = c;
  }
}

template <typename Real>
FeaturePyramid<Real> Encoder<Real>::encode(const Tensor<Real>& image,
                                           std::vector<Tensor<Real>>* attention_weights) const {
  if (image.rank() != 3 || image.dim(2) != 3) throw DimensionError("encode: image must be [h, w, 3]");
  config_.validate_input(image.dim(0), image.dim(1));
  FeaturePyramid<Real> pyramid;
  Tensor<Real> x = image;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& stage = stages_[i];
    x = i == 0 ? overlap_patch_embed(stage.embed, x) : overlap_patch_merge(stage.embed, x);
    for (const auto& block : stage.blocks) {
      x = efficient_self_attention(block.attention, x, attention_weights);
      x = mix_ffn(block.ffn, x);
    }
    pyramid.maps[i] = x;
  }
  return pyramid;
}

template Tensor<float> overlap_patch_embed(const PatchEmbedLayer<float>&, const Tensor<float>&);
template Tensor<double> overlap_patch_embed(const PatchEmbedLayer<double>&, const Tensor<double>&);
template Tensor<float> overlap_patch_merge(const PatchEmbedLayer<float>&, const Tensor<float>&);
template Tensor<double> overlap_patch_merge(const PatchEmbedLayer<double>&, const Tensor<double>&);
template class Encoder<float>;
template class Encoder<double>;

}  // namespace mtlseg
