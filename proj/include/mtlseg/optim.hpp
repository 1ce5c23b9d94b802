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
#include <vector>

#include "mtlseg/tensor.hpp"

namespace mtlseg {

/// Polynomial decay: base_lr * (1 - step / total)^power.
double poly_lr(std::size_t step, std::size_t total, double base_lr, double power);

struct AdamWOptions {
  double base_lr = 6e-5;
  double weight_decay = 0.01;
  std::size_t total_iters = 1;
  double poly_power = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// AdamW with decoupled weight decay, driven by the poly schedule.
template <typename Real>
class AdamW {
 public:
  AdamW(std::vector<Tensor<Real>> params, AdamWOptions options);

  /// Applies one update from the parameters' current gradients (a missing
  /// gradient counts as zero) and returns the learning rate used. Throws
  /// NumericError naming the parameter when a gradient is not finite; the
  /// parameters are left untouched in that case.
  double step();

  std::size_t step_count() const { return step_; }
  double current_lr() const;
  const AdamWOptions& options() const { return options_; }
  const std::vector<std::vector<Real>>& first_moments() const { return m_; }
  const std::vector<std::vector<Real>>& second_moments() const { return v_; }

 private:
  std::vector<Tensor<Real>> params_;
  AdamWOptions options_;
  std::vector<std::vector<Real>> m_, v_;
  std::size_t step_ = 0;
};

extern template class AdamW<float>;
extern template class AdamW<double>;

}  // namespace mtlseg
