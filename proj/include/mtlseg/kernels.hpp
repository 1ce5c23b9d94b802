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
#include <span>

// Dense inner loops behind the differentiable ops. Every kernel exists twice:
// `serial` is the plain reference loop nest, `parallel` is the OpenMP version
// the ops call. Both reduce each output element in the same order, so their
// results are bitwise identical for any thread count.

namespace mtlseg::kernels {

/// Geometry of a grouped 2D cross-correlation over HWC maps. Weights are laid
/// out [k][k][in_c/groups][out_c].
struct ConvGeometry {
  std::size_t in_h = 0, in_w = 0, in_c = 0;
  std::size_t out_h = 0, out_w = 0, out_c = 0;
  std::size_t kernel = 1, stride = 1, pad = 0, groups = 1;

  std::size_t in_per_group() const { return in_c / groups; }
  std::size_t out_per_group() const { return out_c / groups; }
};

#define MTLSEG_DECLARE_KERNELS                                                                  \
  /* C[m,n] (+)= op(A)[m,k] * op(B)[k,n]; A is [m,k] or, transposed, [k,m]. */                  \
  template <typename Real>                                                                      \
  void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,            \
            std::span<const Real> a, std::span<const Real> b, std::span<Real> c,                \
            bool accumulate);                                                                   \
  template <typename Real>                                                                      \
  void conv2d_forward(const ConvGeometry& g, std::span<const Real> x, std::span<const Real> w, \
                      std::span<const Real> bias, std::span<Real> out);                         \
  /* dx += conv2d^T(dout) */                                                                    \
  template <typename Real>                                                                      \
  void conv2d_backward_input(const ConvGeometry& g, std::span<const Real> dout,                 \
                             std::span<const Real> w, std::span<Real> dx);                      \
  /* dw += x (*) dout, dbias += sum(dout); either sink may be empty. */                         \
  template <typename Real>                                                                      \
  void conv2d_backward_weight(const ConvGeometry& g, std::span<const Real> x,                   \
                              std::span<const Real> dout, std::span<Real> dw,                   \
                              std::span<Real> dbias);                                           \
  template <typename Real>                                                                      \
  void softmax_rows(std::size_t rows, std::size_t cols, std::span<const Real> in,               \
                    std::span<Real> out);

namespace serial {
MTLSEG_DECLARE_KERNELS
}  // namespace serial

namespace parallel {
MTLSEG_DECLARE_KERNELS
}  // namespace parallel

#undef MTLSEG_DECLARE_KERNELS

}  // namespace mtlseg::kernels
