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
#include <vector>

#include "mtlseg/kernels.hpp"

// Loop nests are reordered for locality, but every output element still sums
// its terms in the same order as the serial reference.

namespace mtlseg::kernels::parallel {

namespace {
inline bool in_range(std::ptrdiff_t v, std::size_t extent) {
  return v >= 0 && v < static_cast<std::ptrdiff_t>(extent);
}
}  // namespace

template <typename Real>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          std::span<const Real> a, std::span<const Real> b, std::span<Real> c, bool accumulate) {
  const Real* A = a.data();
  const Real* B = b.data();
  Real* C = c.data();
#pragma omp parallel
  {
    std::vector<Real> acc(n);
#pragma omp for schedule(static)
    for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(m); ++si) {
      const auto i = static_cast<std::size_t>(si);
      if (trans_b) {
        for (std::size_t j = 0; j < n; ++j) {
          const Real* brow = B + j * k;
          Real sum = 0;
          for (std::size_t p = 0; p < k; ++p) sum += (trans_a ? A[p * m + i] : A[i * k + p]) * brow[p];
          acc[j] = sum;
        }
      } else {
        std::fill(acc.begin(), acc.end(), Real(0));
        for (std::size_t p = 0; p < k; ++p) {
          const Real av = trans_a ? A[p * m + i] : A[i * k + p];
          const Real* brow = B + p * n;
          for (std::size_t j = 0; j < n; ++j) acc[j] += av * brow[j];
        }
      }
      Real* crow = C + i * n;
      if (accumulate) {
        for (std::size_t j = 0; j < n; ++j) crow[j] += acc[j];
      } else {
        std::copy(acc.begin(), acc.end(), crow);
      }
    }
  }
}

template <typename Real>
void conv2d_forward(const ConvGeometry& g, std::span<const Real> x, std::span<const Real> w,
                    std::span<const Real> bias, std::span<Real> out) {
  const std::size_t cpg = g.in_per_group(), opg = g.out_per_group();
#pragma omp parallel
  {
    std::vector<Real> acc(g.out_c);
#pragma omp for schedule(static)
    for (std::ptrdiff_t soy = 0; soy < static_cast<std::ptrdiff_t>(g.out_h); ++soy) {
      const auto oy = static_cast<std::size_t>(soy);
      for (std::size_t ox = 0; ox < g.out_w; ++ox) {
        std::fill(acc.begin(), acc.end(), Real(0));
        for (std::size_t ky = 0; ky < g.kernel; ++ky) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad);
          if (!in_range(iy, g.in_h)) continue;
          for (std::size_t kx = 0; kx < g.kernel; ++kx) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - static_cast<std::ptrdiff_t>(g.pad);
            if (!in_range(ix, g.in_w)) continue;
            const Real* xrow = x.data() + (static_cast<std::size_t>(iy) * g.in_w + static_cast<std::size_t>(ix)) * g.in_c;
            const Real* wtap = w.data() + (ky * g.kernel + kx) * cpg * g.out_c;
            for (std::size_t group = 0; group < g.groups; ++group) {
              for (std::size_t ci = 0; ci < cpg; ++ci) {
                const Real xv = xrow[group * cpg + ci];
                const Real* wrow = wtap + ci * g.out_c;
                for (std::size_t co = group * opg; co < (group + 1) * opg; ++co) acc[co] += xv * wrow[co];
              }
            }
          }
        }
        Real* orow = out.data() + (oy * g.out_w + ox) * g.out_c;
        for (std::size_t co = 0; co < g.out_c; ++co) orow[co] = bias.empty() ? acc[co] : acc[co] + bias[co];
      }
    }
  }
}

template <typename Real>
void conv2d_backward_input(const ConvGeometry& g, std::span<const Real> dout,
                           std::span<const Real> w, std::span<Real> dx) {
  const std::size_t cpg = g.in_per_group(), opg = g.out_per_group();
  const auto stride = static_cast<std::ptrdiff_t>(g.stride);
#pragma omp parallel
  {
    std::vector<Real> acc(g.in_c);
#pragma omp for schedule(static)
    for (std::ptrdiff_t siy = 0; siy < static_cast<std::ptrdiff_t>(g.in_h); ++siy) {
      const auto iy = static_cast<std::size_t>(siy);
      for (std::size_t ix = 0; ix < g.in_w; ++ix) {
        std::fill(acc.begin(), acc.end(), Real(0));
        for (std::size_t ky = 0; ky < g.kernel; ++ky) {
          const auto ny = static_cast<std::ptrdiff_t>(iy + g.pad) - static_cast<std::ptrdiff_t>(ky);
          if (ny < 0 || ny % stride != 0) continue;
          const auto oy = static_cast<std::size_t>(ny / stride);
          if (oy >= g.out_h) continue;
          for (std::size_t kx = 0; kx < g.kernel; ++kx) {
            const auto nx = static_cast<std::ptrdiff_t>(ix + g.pad) - static_cast<std::ptrdiff_t>(kx);
            if (nx < 0 || nx % stride != 0) continue;
            const auto ox = static_cast<std::size_t>(nx / stride);
            if (ox >= g.out_w) continue;
            const Real* drow = dout.data() + (oy * g.out_w + ox) * g.out_c;
            const Real* wtap = w.data() + (ky * g.kernel + kx) * cpg * g.out_c;
            for (std::size_t cin = 0; cin < g.in_c; ++cin) {
              const std::size_t group = cin / cpg;
              const Real* wrow = wtap + (cin % cpg) * g.out_c;
              Real sum = acc[cin];
              for (std::size_t co = group * opg; co < (group + 1) * opg; ++co) sum += drow[co] * wrow[co];
              acc[cin] = sum;
            }
          }
        }
        Real* dxrow = dx.data() + (iy * g.in_w + ix) * g.in_c;
        for (std::size_t cin = 0; cin < g.in_c; ++cin) dxrow[cin] += acc[cin];
      }
    }
  }
}

template <typename Real>
void conv2d_backward_weight(const ConvGeometry& g, std::span<const Real> x,
                            std::span<const Real> dout, std::span<Real> dw,
                            std::span<Real> dbias) {
  const std::size_t cpg = g.in_per_group(), opg = g.out_per_group();
  const std::size_t taps = g.kernel * g.kernel;
  if (!dw.empty()) {
#pragma omp parallel
    {
      std::vector<Real> acc(cpg * g.out_c);
#pragma omp for schedule(static)
      for (std::ptrdiff_t stap = 0; stap < static_cast<std::ptrdiff_t>(taps); ++stap) {
        const auto tap = static_cast<std::size_t>(stap);
        const std::size_t ky = tap / g.kernel, kx = tap % g.kernel;
        std::fill(acc.begin(), acc.end(), Real(0));
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad);
          if (!in_range(iy, g.in_h)) continue;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) - static_cast<std::ptrdiff_t>(g.pad);
            if (!in_range(ix, g.in_w)) continue;
            const Real* xrow = x.data() + (static_cast<std::size_t>(iy) * g.in_w + static_cast<std::size_t>(ix)) * g.in_c;
            const Real* drow = dout.data() + (oy * g.out_w + ox) * g.out_c;
            for (std::size_t group = 0; group < g.groups; ++group) {
              for (std::size_t ci = 0; ci < cpg; ++ci) {
                const Real xv = xrow[group * cpg + ci];
                Real* arow = acc.data() + ci * g.out_c;
                for (std::size_t co = group * opg; co < (group + 1) * opg; ++co) arow[co] += xv * drow[co];
              }
            }
          }
        }
        Real* dwtap = dw.data() + tap * cpg * g.out_c;
        for (std::size_t i = 0; i < acc.size(); ++i) dwtap[i] += acc[i];
      }
    }
  }
  if (!dbias.empty()) {
    const std::size_t positions = g.out_h * g.out_w;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t sco = 0; sco < static_cast<std::ptrdiff_t>(g.out_c); ++sco) {
      const auto co = static_cast<std::size_t>(sco);
      Real acc = 0;
      for (std::size_t pos = 0; pos < positions; ++pos) acc += dout[pos * g.out_c + co];
      dbias[co] += acc;
    }
  }
}

template <typename Real>
void softmax_rows(std::size_t rows, std::size_t cols, std::span<const Real> in,
                  std::span<Real> out) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t sr = 0; sr < static_cast<std::ptrdiff_t>(rows); ++sr) {
    const auto r = static_cast<std::size_t>(sr);
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

}  // namespace mtlseg::kernels::parallel
