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
#include <optional>
#include <string>
#include <vector>

#include "mtlseg/ops.hpp"
#include "mtlseg/params.hpp"

namespace mtlseg {

template <typename Real>
struct LinearLayer {
  Tensor<Real> weight;  // [in, out]
  Tensor<Real> bias;    // [out]

  Tensor<Real> operator()(const Tensor<Real>& x) const { return ops::linear(x, weight, bias); }
};

template <typename Real>
struct NormLayer {
  Tensor<Real> gain;
  Tensor<Real> bias;

  Tensor<Real> operator()(const Tensor<Real>& x) const { return ops::layer_norm(x, gain, bias); }
};

template <typename Real>
struct ConvLayer {
  Tensor<Real> weight;  // [k, k, in/groups, out]
  Tensor<Real> bias;
  ops::ConvSpec spec;

  Tensor<Real> operator()(const Tensor<Real>& x) const { return ops::conv2d(x, weight, bias, spec); }
};

/// Multi-head attention whose keys and values come from an r x r spatially
/// reduced copy of the input grid. Used for encoder self-attention and, with
/// queries from one task and keys/values from another, for cross-task
/// attention in the decoder.
template <typename Real>
struct AttentionLayer {
  NormLayer<Real> norm;
  LinearLayer<Real> query, key, value, proj;
  std::optional<LinearLayer<Real>> reduce;  // r*r*c -> c, present when reduction > 1
  std::size_t heads = 1;
  std::size_t reduction = 1;
};

template <typename Real>
struct KeyValue {
  Tensor<Real> keys;    // [H/r, W/r, c]
  Tensor<Real> values;  // [H/r, W/r, c]
};

/// Pointwise expand, depthwise 3x3 conv, GELU, pointwise project, residual.
template <typename Real>
struct MixFfnLayer {
  NormLayer<Real> norm;
  LinearLayer<Real> fc1;
  ConvLayer<Real> depthwise;
  LinearLayer<Real> fc2;
};

template <typename Real>
LinearLayer<Real> make_linear(ParamStore<Real>& store, Initializer& init, const std::string& name,
                              std::size_t in, std::size_t out);

template <typename Real>
NormLayer<Real> make_norm(ParamStore<Real>& store, const std::string& name, std::size_t channels);

template <typename Real>
ConvLayer<Real> make_conv(ParamStore<Real>& store, Initializer& init, const std::string& name,
                          std::size_t in, std::size_t out, const ops::ConvSpec& spec);

template <typename Real>
AttentionLayer<Real> make_attention(ParamStore<Real>& store, Initializer& init, const std::string& name,
                                    std::size_t channels, std::size_t heads, std::size_t reduction);

template <typename Real>
MixFfnLayer<Real> make_mix_ffn(ParamStore<Real>& store, Initializer& init, const std::string& name,
                               std::size_t channels, std::size_t expansion);

/// Keys and values of `layer` computed from an already normalised [H, W, c]
/// map. Throws ConfigError when the reduction does not tile the grid.
template <typename Real>
KeyValue<Real> project_key_value(const AttentionLayer<Real>& layer, const Tensor<Real>& normed);

/// softmax(Q K^T / sqrt(d_head)) V per head, heads concatenated. `queries` is
/// [H, W, c]; the result has the same shape. When `head_weights` is given, the
/// per-head attention matrices [H*W, m] are appended to it.
template <typename Real>
Tensor<Real> attend(const Tensor<Real>& queries, const KeyValue<Real>& kv, std::size_t heads,
                    std::vector<Tensor<Real>>* head_weights = nullptr);

/// x + proj(attend(query(LN(x)), kv(LN(x)))) over an [H, W, c] map.
template <typename Real>
Tensor<Real> efficient_self_attention(const AttentionLayer<Real>& layer, const Tensor<Real>& x,
                                      std::vector<Tensor<Real>>* head_weights = nullptr);

/// x + fc2(GELU(dwconv(fc1(LN(x))))) over an [H, W, c] map.
template <typename Real>
Tensor<Real> mix_ffn(const MixFfnLayer<Real>& layer, const Tensor<Real>& x);

/// Sets every entry of `t` to zero in place.
template <typename Real>
void zero_fill(Tensor<Real> t);

}  // namespace mtlseg
