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
#include <span>
#include <vector>

#include "mtlseg/tensor.hpp"

// Differentiable operations. Rank-2+ tensors are read as rows over the last
// axis, so a [H, W, C] feature map is also an [H*W, C] token matrix.

namespace mtlseg::ops {

template <typename Real>
Tensor<Real> matmul(const Tensor<Real>& a, const Tensor<Real>& b);

/// a * b^T, both given as rows over the last axis: [m, k] x [n, k] -> [m, n].
template <typename Real>
Tensor<Real> matmul_nt(const Tensor<Real>& a, const Tensor<Real>& b);

/// x[..., in] * w[in, out] + bias[out]. `bias` may be undefined.
template <typename Real>
Tensor<Real> linear(const Tensor<Real>& x, const Tensor<Real>& w, const Tensor<Real>& bias);

template <typename Real>
Tensor<Real> add(const Tensor<Real>& a, const Tensor<Real>& b);

template <typename Real>
Tensor<Real> mul(const Tensor<Real>& a, const Tensor<Real>& b);

template <typename Real>
Tensor<Real> scale(const Tensor<Real>& x, Real factor);

template <typename Real>
Tensor<Real> sum(const Tensor<Real>& x);

template <typename Real>
Tensor<Real> mean(const Tensor<Real>& x);

template <typename Real>
Tensor<Real> softmax_lastdim(const Tensor<Real>& x);

/// Tanh-approximated GELU.
template <typename Real>
Tensor<Real> gelu(const Tensor<Real>& x);

template <typename Real>
Tensor<Real> layer_norm(const Tensor<Real>& x, const Tensor<Real>& gain, const Tensor<Real>& bias,
                        Real eps = Real(1e-5));

struct ConvSpec {
  std::size_t kernel = 3;
  std::size_t stride = 1;
  std::size_t pad = 1;
  std::size_t groups = 1;
};

/// Zero-padded cross-correlation of x[H, W, Cin] with w[k, k, Cin/groups, Cout].
template <typename Real>
Tensor<Real> conv2d(const Tensor<Real>& x, const Tensor<Real>& w, const Tensor<Real>& bias,
                    const ConvSpec& spec);

/// Output extent of a convolution along one axis; throws DimensionError when
/// the result would be empty.
std::size_t conv_output_extent(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t pad);

/// Bilinear resize of x[h, w, c] by an integer factor, half-pixel centres
/// (align_corners = false) with edge clamping.
template <typename Real>
Tensor<Real> bilinear_upsample(const Tensor<Real>& x, std::size_t factor);

template <typename Real>
Tensor<Real> reshape(const Tensor<Real>& x, Shape shape);

template <typename Real>
Tensor<Real> concat_lastdim(const std::vector<Tensor<Real>>& parts);

template <typename Real>
Tensor<Real> slice_lastdim(const Tensor<Real>& x, std::size_t start, std::size_t length);

/// Folds every r x r block of x[H, W, c] into one vector: [H/r, W/r, r*r*c],
/// block entries ordered (dy, dx, channel).
template <typename Real>
Tensor<Real> space_to_depth(const Tensor<Real>& x, std::size_t r);

/// Mean two-class cross-entropy of logits[..., 2] against labels in {0, 1}.
template <typename Real>
Tensor<Real> cross_entropy_2class(const Tensor<Real>& logits, std::span<const std::uint8_t> labels);

}  // namespace mtlseg::ops
