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

#include <cstdint>
#include <span>
#include <vector>

#include "mtlseg/decoder.hpp"
#include "mtlseg/encoder.hpp"

namespace mtlseg {

struct ModelConfig {
  EncoderConfig encoder = EncoderConfig::t0();
  DecoderConfig decoder;

  bool operator==(const ModelConfig&) const = default;
};

/// Hierarchical encoder plus multi-task decoder. Owns every parameter; the
/// layer structs inside share the same tensor handles.
template <typename Real>
class MultiTaskSegmenter {
 public:
  MultiTaskSegmenter(const ModelConfig& config, std::uint64_t seed);

  /// Per-task [h, w, 2] logits for an [h, w, 3] image.
  std::vector<Tensor<Real>> forward(const Tensor<Real>& image,
                                    std::vector<AttentionRecord<Real>>* records = nullptr) const;

  const ModelConfig& config() const { return config_; }
  ParamStore<Real>& params() { return store_; }
  const ParamStore<Real>& params() const { return store_; }
  const Encoder<Real>& encoder() const { return encoder_; }
  const MtlDecoder<Real>& decoder() const { return decoder_; }

 private:
  ModelConfig config_;
  ParamStore<Real> store_;
  Initializer init_;
  Encoder<Real> encoder_;
  MtlDecoder<Real> decoder_;
};

/// Maps 8-bit RGB to [-1, 1] floats in an [h, w, 3] tensor.
template <typename Real>
Tensor<Real> image_to_tensor(std::span<const std::uint8_t> rgb, std::size_t h, std::size_t w);

/// Per-pixel class of [h, w, 2] logits: 1 only when channel 1 is strictly
/// larger, so ties resolve to background.
template <typename Real>
std::vector<std::uint8_t> argmax_mask(const Tensor<Real>& logits);

extern template class MultiTaskSegmenter<float>;
extern template class MultiTaskSegmenter<double>;

}  // namespace mtlseg
