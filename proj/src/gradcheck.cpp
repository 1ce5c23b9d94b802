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

#include "mtlseg/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mtlseg/errors.hpp"

namespace mtlseg {

namespace {

double evaluate(const std::function<Tensor<double>()>& f) {
  NoGradGuard guard;
  const double v = f().item();
  if (!std::isfinite(v)) throw NumericError("grad_check: objective is not finite");
  return v;
}

}  // namespace

GradCheckReport grad_check(const std::function<Tensor<double>()>& f, std::vector<Tensor<double>> params,
                           const GradCheckOptions& options) {
  GradCheckReport report;
  for (auto& p : params) p.zero_grad();
  {
    auto y = f();
    if (!std::isfinite(y.item())) throw NumericError("grad_check: objective is not finite");
    y.backward();
  }
  for (const auto& p : params) {
    const auto g = p.grad();
    report.analytic.emplace_back(p.numel(), 0.0);
    std::copy(g.begin(), g.end(), report.analytic.back().begin());
  }

  std::mt19937_64 rng(options.seed);
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto values = params[t].mutable_data();
    std::vector<std::size_t> coords(values.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (options.max_coords_per_tensor > 0 && coords.size() > options.max_coords_per_tensor) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords_per_tensor);
      std::sort(coords.begin(), coords.end());
    }
    for (auto i : coords) {
      const double original = values[i];
      values[i] = original + options.eps;
      const double up = evaluate(f);
      values[i] = original - options.eps;
      const double down = evaluate(f);
      values[i] = original;
      const double numeric = (up - down) / (2 * options.eps);
      const double analytic = report.analytic[t][i];
      const double abs_err = std::abs(numeric - analytic);
      const double rel_err = abs_err / std::max({std::abs(numeric), std::abs(analytic), 1e-8});
      report.max_abs_error = std::max(report.max_abs_error, abs_err);
      if (rel_err > report.max_rel_error || report.coordinates == 0) {
        report.max_rel_error = std::max(report.max_rel_error, rel_err);
        report.worst = std::to_string(t) + "#" + std::to_string(i);
      }
      ++report.coordinates;
    }
  }
  return report;
}

}  // namespace mtlseg
