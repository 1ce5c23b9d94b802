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

#include "mtlseg/optim.hpp"

#include <cmath>

#include "mtlseg/errors.hpp"

namespace mtlseg {

double poly_lr(std::size_t step, std::size_t total, double base_lr, double power) {
  if (total == 0 || step > total)
    throw ArgumentError("poly_lr: step " + std::to_string(step) + " outside [0, " + std::to_string(total) + "]");
  const double remaining = 1.0 - static_cast<double>(step) / static_cast<double>(total);
  return base_lr * std::pow(remaining, power);
}

template <typename Real>
AdamW<Real>::AdamW(std::vector<Tensor<Real>> params, AdamWOptions options)
    : params_(std::move(params)), options_(options) {
  if (options_.total_iters == 0) throw ConfigError("AdamW: total_iters must be positive");
  if (options_.base_lr <= 0) throw ConfigError("AdamW: base_lr must be positive");
  if (options_.weight_decay < 0) throw ConfigError("AdamW: weight_decay must be nonnegative");
  for (const auto& p : params_) {
    m_.emplace_back(p.numel(), Real(0));
    v_.emplace_back(p.numel(), Real(0));
  }
}

template <typename Real>
double AdamW<Real>::current_lr() const {
  return poly_lr(step_, options_.total_iters, options_.base_lr, options_.poly_power);
}

template <typename Real>
double AdamW<Real>::step() {
  if (step_ >= options_.total_iters)
    throw ConfigError("AdamW: schedule exhausted after " + std::to_string(options_.total_iters) + " steps");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto g = params_[i].grad();
    for (std::size_t j = 0; j < g.size(); ++j)
      if (!std::isfinite(g[j]))
        throw NumericError("AdamW: non-finite gradient in parameter #" + std::to_string(i) + " at index " +
                           std::to_string(j) + " (step " + std::to_string(step_) + ")");
  }
  const double lr = current_lr();
  const std::size_t t = step_ + 1;
  const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t));
  const auto b1 = static_cast<Real>(options_.beta1), b2 = static_cast<Real>(options_.beta2);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto p = params_[i].mutable_data();
    const auto g = params_[i].grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const Real grad = g.empty() ? Real(0) : g[j];
      p[j] -= static_cast<Real>(lr * options_.weight_decay) * p[j];
      m[j] = b1 * m[j] + (Real(1) - b1) * grad;
      v[j] = b2 * v[j] + (Real(1) - b2) * grad * grad;
      const double m_hat = static_cast<double>(m[j]) / bc1;
      const double v_hat = static_cast<double>(v[j]) / bc2;
      p[j] -= static_cast<Real>(lr * m_hat / (std::sqrt(v_hat) + options_.eps));
    }
  }
  ++step_;
  return lr;
}

template class AdamW<float>;
template class AdamW<double>;

}  // namespace mtlseg
