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

#include <algorithm>
#include <cmath>

#include "mtlseg/kernels.hpp"

namespace mtlseg::kernels::serial {

template <typename Real>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          std::span<const Real> a, std::span<const Real> b, std::span<Real> c, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Real acc = 0;
      for (std::size_t p = 0; p < k; ++p) {
        const Real av = trans_a ? a[p * m + i] : a[i * k + p];
        const Real bv = trans_b ? b[j * k + p] : b[p * n + j];
        acc += av * bv;
      }
      c[i * n + j] = accumulate ? c[i * n + j] + acc : acc;
    }
  }
}

template <typename Real>
void conv2d_forward(const ConvGeometry& g, std::span<const Real> x, std::span<const Real> w,
                    std::span<const Real> bias, std::span<Real> out) {
  const std::size_t cpg = g.in_per_group(), opg = g.out_per_group();
  for (std::size_t oy = 0; oy < g.out_h; ++oy) {
    for (std::size_t ox = 0; ox < g.out_w; ++ox) {
      for (std::size_t co = 0; co < g.out_c; ++co) {
        const std::size_t group = co / opg;
        Real acc = 0;
        for (std::size_t ky = 0; ky < g.kernel; ++ky) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                          static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
          for (std::size_t kx = 0; kx < g.kernel; ++kx) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                            static_cast<std::ptrdiff_t>(g.pad);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.in_w)) continue;
            for (std::size_t ci = 0; ci < cpg; ++ci) {
              const Real xv = x[(static_cast<std::size_t>(iy) * g.in_w + static_cast<std::size_t>(ix)) * g.in_c +
                                group * cpg + ci];
              const Real wv = w[((ky * g.kernel + kx) * cpg + ci) * g.out_c + co];
              acc += xv * wv;
            }
          }
        }
        out[(oy * g.out_w + ox) * g.out_c + co] = bias.empty() ? acc : acc + bias[co];
      }
    }
  }
}

template <typename Real>
void conv2d_backward_input(const ConvGeometry& g, std::span<const Real> dout,
                           std::span<const Real> w, std::span<Real> dx) {
  const std::size_t cpg = g.in_per_group(), opg = g.out_per_group();
  for (std::size_t iy = 0; iy < g.in_h; ++iy) {
    for (std::size_t ix = 0; ix < g.in_w; ++ix) {
      for (std::size_t cin = 0; cin < g.in_c; ++cin) {
        const std::size_t group = cin / cpg, ci = cin % cpg;
        Real acc = 0;
        for (std::size_t ky = 0; ky < g.kernel; ++ky) {
          const auto ny = static_cast<std::ptrdiff_t>(iy + g.pad) - static_cast<std::ptrdiff_t>(ky);
          if (ny < 0 || ny % static_cast<std::ptrdiff_t>(g.stride) != 0) continue;
          const auto oy = static_cast<std::size_t>(ny) / g.stride;
          if (oy >= g.out_h) continue;
          for (std::size_t kx = 0; kx < g.kernel; ++kx) {
            const auto nx = static_cast<std::ptrdiff_t>(ix + g.pad) - static_cast<std::ptrdiff_t>(kx);
            if (nx < 0 || nx % static_cast<std::ptrdiff_t>(g.stride) != 0) continue;
            const auto ox = static_cast<std::size_t>(nx) / g.stride;
            if (ox >= g.out_w) continue;
            for (std::size_t co = group * opg; co < (group + 1) * opg; ++co) {
              acc += dout[(oy * g.out_w + ox) * g.out_c + co] *
                     w[((ky * g.kernel + kx) * cpg + ci) * g.out_c + co];
            }
          }
        }
        dx[(iy * g.in_w + ix) * g.in_c + cin] += acc;
      }
    }
  }
}

template <typename Real>
void conv2d_backward_weight(const ConvGeometry& g, std::span<const Real> x,
                            std::span<const Real> dout, std::span<Real> dw,
                            std::span<Real> dbias) {
  const std::size_t cpg = g.in_per_group(), opg = g.out_per_group();
  if (!dw.empty()) {
    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        for (std::size_t ci = 0; ci < cpg; ++ci) {
          for (std::size_t co = 0; co < g.out_c; ++co) {
            const std::size_t group = co / opg;
            Real acc = 0;
            for (std::size_t oy = 0; oy < g.out_h; ++oy) {
              const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                              static_cast<std::ptrdiff_t>(g.pad);
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
              for (std::size_t ox = 0; ox < g.out_w; ++ox) {
                const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                static_cast<std::ptrdiff_t>(g.pad);
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.in_w)) continue;
                acc += x[(static_cast<std::size_t>(iy) * g.in_w + static_cast<std::size_t>(ix)) * g.in_c +
                         group * cpg + ci] *
                       dout[(oy * g.out_w + ox) * g.out_c + co];
              }
            }
            dw[((ky * g.kernel + kx) * cpg + ci) * g.out_c + co] += acc;
          }
        }
      }
    }
  }
  if (!dbias.empty()) {
    for (std::size_t co = 0; co < g.out_c; ++co) {
      Real acc = 0;
      for (std::size_t pos = 0; pos < g.out_h * g.out_w; ++pos) acc += dout[pos * g.out_c + co];
      dbias[co] += acc;
    }
  }
}

template <typename Real>
void softmax_rows(std::size_t rows, std::size_t cols, std::span<const Real> in,
                  std::span<Real> out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* src = in.data() + r * cols;
    Real* dst = out.data() + r * cols;
    Real peak = src[0];
    for (std::size_t j = 1; j < cols; ++j) peak = std::max(peak, src[j]);
    Real total = 0;
    for (std::size_t j = 0; j < cols; ++j) {
      dst[j] = std::exp(src[j] - peak);
      total += dst[j];
    }
    for (std::size_t j = 0; j < cols; ++j) dst[j] /= total;
  }
}

#define MTLSEG_INSTANTIATE(Real)                                                             \
  template void gemm<Real>(bool, bool, std::size_t, std::size_t, std::size_t,                \
                           std::span<const Real>, std::span<const Real>, std::span<Real>,    \
                           bool);                                                            \
  template void conv2d_forward<Real>(const ConvGeometry&, std::span<const Real>,             \
                                     std::span<const Real>, std::span<const Real>,           \
                                     std::span<Real>);                                       \
  template void conv2d_backward_input<Real>(const ConvGeometry&, std::span<const Real>,      \
                                            std::span<const Real>, std::span<Real>);         \
  template void conv2d_backward_weight<Real>(const ConvGeometry&, std::span<const Real>,     \
                                             std::span<const Real>, std::span<Real>,         \
                                             std::span<Real>);                               \
  template void softmax_rows<Real>(std::size_t, std::size_t, std::span<const Real>,          \
                                   std::span<Real>);

MTLSEG_INSTANTIATE(float)
MTLSEG_INSTANTIATE(double)
#undef MTLSEG_INSTANTIATE

}  // namespace mtlseg::kernels::serial
