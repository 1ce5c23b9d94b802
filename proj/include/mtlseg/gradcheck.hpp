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
#include <functional>
#include <string>
#include <vector>

#include "mtlseg/tensor.hpp"

namespace mtlseg {

struct GradCheckOptions {
  double eps = 1e-6;
  /// 0 checks every coordinate; otherwise a seeded sample of this many
  /// coordinates per tensor.
  std::size_t max_coords_per_tensor = 0;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_rel_error = 0;
  double max_abs_error = 0;
  std::size_t coordinates = 0;
  /// "tensor#index" of the worst relative error.
  std::string worst;
  std::vector<std::vector<double>> analytic;
};

/// Compares reverse-mode gradients of the scalar `f` with central differences
/// (f(x+eps) - f(x-eps)) / 2eps, per coordinate of `params`. Relative error
/// uses max(|a|, |b|, 1e-8) as denominator. `f` must be deterministic.
GradCheckReport grad_check(const std::function<Tensor<double>()>& f, std::vector<Tensor<double>> params,
                           const GradCheckOptions& options = {});

}  // namespace mtlseg
