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

#include "mtlseg/params.hpp"

#include "mtlseg/errors.hpp"

namespace mtlseg {

template <typename Real>
Tensor<Real> ParamStore<Real>::add(const std::string& name, Tensor<Real> value) {
  if (contains(name)) throw ConfigError("duplicate parameter name " + name);
  entries_.emplace_back(name, value);
  return value;
}

template <typename Real>
std::vector<Tensor<Real>> ParamStore<Real>::tensors() const {
  std::vector<Tensor<Real>> out;
  out.reserve(entries_.size());
  for (const auto& [name, t] : entries_) out.push_back(t);
  return out;
}

template <typename Real>
Tensor<Real> ParamStore<Real>::get(const std::string& name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return t;
  throw ArgumentError("unknown parameter " + name);
}

template <typename Real>
bool ParamStore<Real>::contains(const std::string& name) const {
  for (const auto& [n, t] : entries_)
    if (n == name) return true;
  return false;
}

template <typename Real>
std::size_t ParamStore<Real>::count() const {
  return count_with_prefix("");
}

template <typename Real>
std::size_t ParamStore<Real>::count_with_prefix(const std::string& prefix) const {
  std::size_t total = 0;
  for (const auto& [n, t] : entries_)
    if (n.starts_with(prefix)) total += t.numel();
  return total;
}

template <typename Real>
void ParamStore<Real>::zero_grad() {
  for (auto& [n, t] : entries_) t.zero_grad();
}

template <typename To, typename From>
void copy_parameters(const ParamStore<From>& from, ParamStore<To>& to) {
  const auto& src = from.entries();
  const auto& dst = to.entries();
  if (src.size() != dst.size()) throw ConfigError("copy_parameters: stores have different layouts");
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i].first != dst[i].first || src[i].second.shape() != dst[i].second.shape())
      throw ConfigError("copy_parameters: mismatch at " + src[i].first);
    auto out = Tensor<To>(dst[i].second).mutable_data();
    const auto in = src[i].second.data();
    for (std::size_t j = 0; j < in.size(); ++j) out[j] = static_cast<To>(in[j]);
  }
}

std::vector<double> Initializer::truncated_normal(std::size_t n, double std) {
  std::normal_distribution<double> dist(0.0, std);
  std::vector<double> out(n);
  for (auto& v : out) {
    do {
      v = dist(rng_);
    } while (v < -2 * std || v > 2 * std);
  }
  return out;
}

std::vector<double> Initializer::normal(std::size_t n, double std) {
  std::normal_distribution<double> dist(0.0, std);
  std::vector<double> out(n);
  for (auto& v : out) v = dist(rng_);
  return out;
}

template <typename Real>
Tensor<Real> make_param(Shape shape, const std::vector<double>& values) {
  std::vector<Real> data(values.begin(), values.end());
  return Tensor<Real>(std::move(shape), std::move(data), true);
}

template class ParamStore<float>;
template class ParamStore<double>;
template void copy_parameters<double, float>(const ParamStore<float>&, ParamStore<double>&);
template void copy_parameters<float, double>(const ParamStore<double>&, ParamStore<float>&);
template void copy_parameters<float, float>(const ParamStore<float>&, ParamStore<float>&);
template void copy_parameters<double, double>(const ParamStore<double>&, ParamStore<double>&);
template Tensor<float> make_param<float>(Shape, const std::vector<double>&);
template Tensor<double> make_param<double>(Shape, const std::vector<double>&);

}  // namespace mtlseg
