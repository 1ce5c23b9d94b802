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

#include "mtlseg/model.hpp"

#include "mtlseg/errors.hpp"

namespace mtlseg {

template <typename Real>
MultiTaskSegmenter<Real>::MultiTaskSegmenter(const ModelConfig& config, std::uint64_t seed)
    : config_(config),
      init_(seed),
      encoder_(config.encoder, store_, init_),
      decoder_(config.decoder, config.encoder.embed_dims, store_, init_) {}

template <typename Real>
std::vector<Tensor<Real>> MultiTaskSegmenter<Real>::forward(const Tensor<Real>& image,
                                                      std::vector<AttentionRecord<Real>>* records) const {
  return decoder_.forward(encoder_.encode(image), records);
}

template <typename Real>
Tensor<Real> image_to_tensor(std::span<const std::uint8_t> rgb, std::size_t h, std::size_t w) {
  if (rgb.size() != h * w * 3)
    throw DimensionError("image_to_tensor: " + std::to_string(rgb.size()) + " bytes for " + std::to_string(h) + "x" +
                         std::to_string(w) + "x3");
  std::vector<Real> values(rgb.size());
  for (std::size_t i = 0; i < rgb.size(); ++i) values[i] = static_cast<Real>(rgb[i]) / Real(127.5) - Real(1);
  return Tensor<Real>({h, w, 3}, std::move(values));
}

template <typename Real>
std::vector<std::uint8_t> argmax_mask(const Tensor<Real>& logits) {
  if (logits.cols() != 2) throw DimensionError("argmax_mask: logits need 2 channels");
  const auto z = logits.data();
  std::vector<std::uint8_t> mask(logits.rows());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = z[2 * i + 1] > z[2 * i] ? 1 : 0;
  return mask;
}

template class MultiTaskSegmenter<float>;
template class MultiTaskSegmenter<double>;
template Tensor<float> image_to_tensor<float>(std::span<const std::uint8_t>, std::size_t, std::size_t);
template Tensor<double> image_to_tensor<double>(std::span<const std::uint8_t>, std::size_t, std::size_t);
template std::vector<std::uint8_t> argmax_mask(const Tensor<float>&);
template std::vector<std::uint8_t> argmax_mask(const Tensor<double>&);

}  // namespace mtlseg
