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

#include "mtlseg/layers.hpp"

#include <algorithm>
#include <cmath>

#include "mtlseg/errors.hpp"

namespace mtlseg {

template <typename Real>
LinearLayer<Real> make_linear(ParamStore<Real>& store, Initializer& init, const std::string& name,
                              std::size_t in, std::size_t out) {
  LinearLayer<Real> layer;
  layer.weight = store.add(name + ".weight", make_param<Real>({in, out}, init.truncated_normal(in * out, 0.02)));
  layer.bias = store.add(name + ".bias", make_param<Real>({out}, std::vector<double>(out, 0.0)));
  return layer;
}

template <typename Real>
NormLayer<Real> make_norm(ParamStore<Real>& store, const std::string& name, std::size_t channels) {
  NormLayer<Real> layer;
  layer.gain = store.add(name + ".gain", make_param<Real>({channels}, std::vector<double>(channels, 1.0)));
  layer.bias = store.add(name + ".bias", make_param<Real>({channels}, std::vector<double>(channels, 0.0)));
  return layer;
}

template <typename Real>
ConvLayer<Real> make_conv(ParamStore<Real>& store, Initializer& init, const std::string& name,
                          std::size_t in, std::size_t out, const ops::ConvSpec& spec) {
  const std::size_t per_group = in / spec.groups;
  const std::size_t fan_in = spec.kernel * spec.kernel * per_group;
  const std::size_t n = spec.kernel * spec.kernel * per_group * out;
  ConvLayer<Real> layer;
  layer.spec = spec;
  layer.weight = store.add(name + ".weight", make_param<Real>({spec.kernel, spec.kernel, per_group, out},
                                                              init.normal(n, std::sqrt(2.0 / static_cast<double>(fan_in)))));
  layer.bias = store.add(name + ".bias", make_param<Real>({out}, std::vector<double>(out, 0.0)));
  return layer;
}

template <typename Real>
AttentionLayer<Real> make_attention(ParamStore<Real>& store, Initializer& init, const std::string& name,
                                    std::size_t channels, std::size_t heads, std::size_t reduction) {
  if (heads == 0 || channels % heads != 0)
    throw ConfigError(name + ": " + std::to_string(channels) + " channels not divisible by " + std::to_string(heads) +
                      " heads");
  if (reduction == 0) throw ConfigError(name + ": reduction must be positive");
  AttentionLayer<Real> layer;
  layer.heads = heads;
  layer.reduction = reduction;
  layer.norm = make_norm(store, name + ".norm", channels);
  layer.query = make_linear(store, init, name + ".query", channels, channels);
  if (reduction > 1) layer.reduce = make_linear(store, init, name + ".reduce", reduction * reduction * channels, channels);
  layer.key = make_linear(store, init, name + ".key", channels, channels);
  layer.value = make_linear(store, init, name + ".value", channels, channels);
  layer.proj = make_linear(store, init, name + ".proj", channels, channels);
  return layer;
}

template <typename Real>
MixFfnLayer<Real> make_mix_ffn(ParamStore<Real>& store, Initializer& init, const std::string& name,
                               std::size_t channels, std::size_t expansion) {
  const std::size_t hidden = channels * expansion;
  MixFfnLayer<Real> layer;
  layer.norm = make_norm(store, name + ".norm", channels);
  layer.fc1 = make_linear(store, init, name + ".fc1", channels, hidden);
  layer.depthwise = make_conv(store, init, name + ".dwconv", hidden, hidden, {3, 1, 1, hidden});
  layer.fc2 = make_linear(store, init, name + ".fc2", hidden, channels);
  return layer;
}

template <typename Real>
KeyValue<Real> project_key_value(const AttentionLayer<Real>& layer, const Tensor<Real>& normed) {
  Tensor<Real> source = normed;
  if (layer.reduction > 1) {
    if (!layer.reduce) throw ConfigError("attention: reduction > 1 without a reduction projection");
    source = (*layer.reduce)(ops::space_to_depth(normed, layer.reduction));
  }
  return {layer.key(source), layer.value(source)};
}

template <typename Real>
Tensor<Real> attend(const Tensor<Real>& queries, const KeyValue<Real>& kv, std::size_t heads,
                    std::vector<Tensor<Real>>* head_weights) {
  const std::size_t c = queries.cols();
  if (heads == 0 || c % heads != 0) throw ConfigError("attend: channels not divisible by heads");
  if (kv.keys.cols() != c || kv.values.cols() != c || kv.keys.rows() != kv.values.rows())
    throw DimensionError("attend: query/key/value widths disagree");
  const std::size_t dh = c / heads, m = kv.keys.rows();
  const Real inv_sqrt = Real(1) / std::sqrt(static_cast<Real>(dh));
  std::vector<Tensor<Real>> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const auto q = heads == 1 ? queries : ops::slice_lastdim(queries, h * dh, dh);
    const auto k = heads == 1 ? kv.keys : ops::slice_lastdim(kv.keys, h * dh, dh);
    const auto v = heads == 1 ? kv.values : ops::slice_lastdim(kv.values, h * dh, dh);
    auto weights = ops::softmax_lastdim(ops::scale(ops::matmul_nt(q, k), inv_sqrt));
    if (head_weights) head_weights->push_back(weights);
    outs.push_back(ops::matmul(weights, ops::reshape(v, {m, dh})));
  }
  auto joined = heads == 1 ? outs.front() : ops::concat_lastdim(outs);
  return ops::reshape(joined, queries.shape());
}

template <typename Real>
Tensor<Real> efficient_self_attention(const AttentionLayer<Real>& layer, const Tensor<Real>& x,
                                      std::vector<Tensor<Real>>* head_weights) {
  if (x.rank() != 3) throw DimensionError("efficient_self_attention: input must be an [H, W, c] grid");
  const auto normed = layer.norm(x);
  const auto kv = project_key_value(layer, normed);
  const auto mixed = attend(layer.query(normed), kv, layer.heads, head_weights);
  return ops::add(x, layer.proj(mixed));
}

template <typename Real>
Tensor<Real> mix_ffn(const MixFfnLayer<Real>& layer, const Tensor<Real>& x) {
  if (x.rank() != 3) throw DimensionError("mix_ffn: tokens must carry an [H, W, c] grid layout");
  auto hidden = layer.fc1(layer.norm(x));
  hidden = ops::gelu(layer.depthwise(hidden));
  return ops::add(x, layer.fc2(hidden));
}

template <typename Real>
void zero_fill(Tensor<Real> t) {
  auto d = t.mutable_data();
  std::fill(d.begin(), d.end(), Real(0));
}

#define MTLSEG_INSTANTIATE(Real)                                                                                    \
  template LinearLayer<Real> make_linear(ParamStore<Real>&, Initializer&, const std::string&, std::size_t,          \
                                         std::size_t);                                                              \
  template NormLayer<Real> make_norm(ParamStore<Real>&, const std::string&, std::size_t);                           \
  template ConvLayer<Real> make_conv(ParamStore<Real>&, Initializer&, const std::string&, std::size_t, std::size_t, \
                                     const ops::ConvSpec&);                                                         \
  template AttentionLayer<Real> make_attention(ParamStore<Real>&, Initializer&, const std::string&, std::size_t,    \
                                               std::size_t, std::size_t);                                           \
  template MixFfnLayer<Real> make_mix_ffn(ParamStore<Real>&, Initializer&, const std::string&, std::size_t,         \
                                          std::size_t);                                                             \
  template KeyValue<Real> project_key_value(const AttentionLayer<Real>&, const Tensor<Real>&);                     \
  template Tensor<Real> attend(const Tensor<Real>&, const KeyValue<Real>&, std::size_t, std::vector<Tensor<Real>>*); \
  template Tensor<Real> efficient_self_attention(const AttentionLayer<Real>&, const Tensor<Real>&,                 \
                                                 std::vector<Tensor<Real>>*);                                       \
  template Tensor<Real> mix_ffn(const MixFfnLayer<Real>&, const Tensor<Real>&);                                     \
  template void zero_fill(Tensor<Real>);

MTLSEG_INSTANTIATE(float)
MTLSEG_INSTANTIATE(double)
#undef MTLSEG_INSTANTIATE

}  // namespace mtlseg
