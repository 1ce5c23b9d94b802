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
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mtlseg/tensor.hpp"

namespace mtlseg {

/// Ordered, named collection of trainable leaves. Registration order is the
/// checkpoint order and the optimizer order.
template <typename Real>
class ParamStore {
 public:
  Tensor<Real> add(const std::string& name, Tensor<Real> value);

  const std::vector<std::pair<std::string, Tensor<Real>>>& entries() const { return entries_; }
  std::vector<Tensor<Real>> tensors() const;
  /// Throws ArgumentError for unknown names.
  Tensor<Real> get(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::size_t count() const;
  /// Total scalars across entries whose name starts with `prefix`.
  std::size_t count_with_prefix(const std::string& prefix) const;
  void zero_grad();

 private:
  std::vector<std::pair<std::string, Tensor<Real>>> entries_;
};

/// Copies values between stores of possibly different precision. Names and
/// shapes must match one to one.
template <typename To, typename From>
void copy_parameters(const ParamStore<From>& from, ParamStore<To>& to);

/// Seeded source of initial weights.
class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : rng_(seed) {}

  /// Normal(0, std) resampled until within two standard deviations.
  std::vector<double> truncated_normal(std::size_t n, double std);
  std::vector<double> normal(std::size_t n, double std);

 private:
  std::mt19937_64 rng_;
};

template <typename Real>
Tensor<Real> make_param(Shape shape, const std::vector<double>& values);

extern template class ParamStore<float>;
extern template class ParamStore<double>;

}  // namespace mtlseg
