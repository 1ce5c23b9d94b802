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

#include "mtlseg/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mtlseg/errors.hpp"
#include "mtlseg/kernels.hpp"

namespace mtlseg::ops {

namespace kp = kernels::parallel;

namespace {

template <typename Real>
void require_same_shape(const Tensor<Real>& a, const Tensor<Real>& b, const char* op) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
}

}  // namespace

std::size_t conv_output_extent(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t pad) {
  if (stride == 0 || kernel == 0) throw DimensionError("conv2d: kernel and stride must be positive");
  if (in + 2 * pad < kernel)
    throw DimensionError("conv2d: nonpositive output extent for input " + std::to_string(in));
  return (in + 2 * pad - kernel) / stride + 1;
}

template <typename Real>
Tensor<Real> matmul(const Tensor<Real>& a, const Tensor<Real>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
    throw DimensionError("matmul: cannot multiply " + shape_str(a.shape()) + " by " + shape_str(b.shape()));
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<Real> out(m * n);
  kp::gemm<Real>(false, false, m, n, k, a.data(), b.data(), out, false);
  return Tensor<Real>::make_result("matmul", {m, n}, std::move(out), {a, b}, [a, b, m, n, k](auto& self) {
    if (auto da = grad_sink(a); !da.empty()) kp::gemm<Real>(false, true, m, k, n, self.grad, b.data(), da, true);
    if (auto db = grad_sink(b); !db.empty()) kp::gemm<Real>(true, false, k, n, m, a.data(), self.grad, db, true);
  });
}

template <typename Real>
Tensor<Real> matmul_nt(const Tensor<Real>& a, const Tensor<Real>& b) {
  if (a.cols() != b.cols())
    throw DimensionError("matmul_nt: inner extents differ " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const std::size_t m = a.rows(), n = b.rows(), k = a.cols();
  std::vector<Real> out(m * n);
  kp::gemm<Real>(false, true, m, n, k, a.data(), b.data(), out, false);
  return Tensor<Real>::make_result("matmul_nt", {m, n}, std::move(out), {a, b}, [a, b, m, n, k](auto& self) {
    if (auto da = grad_sink(a); !da.empty()) kp::gemm<Real>(false, false, m, k, n, self.grad, b.data(), da, true);
    if (auto db = grad_sink(b); !db.empty()) kp::gemm<Real>(true, false, n, k, m, self.grad, a.data(), db, true);
  });
}

template <typename Real>
Tensor<Real> linear(const Tensor<Real>& x, const Tensor<Real>& w, const Tensor<Real>& bias) {
  if (w.rank() != 2 || x.cols() != w.dim(0))
    throw DimensionError("linear: input " + shape_str(x.shape()) + " vs weight " + shape_str(w.shape()));
  const std::size_t rows = x.rows(), in = w.dim(0), out_c = w.dim(1);
  if (bias.defined() && bias.numel() != out_c)
    throw DimensionError("linear: bias " + shape_str(bias.shape()) + " for " + std::to_string(out_c) + " outputs");
  std::vector<Real> out(rows * out_c);
  kp::gemm<Real>(false, false, rows, out_c, in, x.data(), w.data(), out, false);
  if (bias.defined()) {
    const auto b = bias.data();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < out_c; ++j) out[r * out_c + j] += b[j];
  }
  Shape shape = x.shape();
  shape.back() = out_c;
  return Tensor<Real>::make_result(
      "linear", std::move(shape), std::move(out), {x, w, bias}, [x, w, bias, rows, in, out_c](auto& self) {
        if (auto dx = grad_sink(x); !dx.empty()) kp::gemm<Real>(false, true, rows, in, out_c, self.grad, w.data(), dx, true);
        if (auto dw = grad_sink(w); !dw.empty()) kp::gemm<Real>(true, false, in, out_c, rows, x.data(), self.grad, dw, true);
        if (auto db = grad_sink(bias); !db.empty()) {
          for (std::size_t j = 0; j < out_c; ++j) {
            Real acc = 0;
            for (std::size_t r = 0; r < rows; ++r) acc += self.grad[r * out_c + j];
            db[j] += acc;
          }
        }
      });
}

template <typename Real>
Tensor<Real> add(const Tensor<Real>& a, const Tensor<Real>& b) {
  require_same_shape(a, b, "add");
  std::vector<Real> out(a.numel());
  const auto av = a.data(), bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return Tensor<Real>::make_result("add", a.shape(), std::move(out), {a, b}, [a, b](auto& self) {
    for (const auto* t : {&a, &b}) {
      if (auto d = grad_sink(*t); !d.empty())
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += self.grad[i];
    }
  });
}

template <typename Real>
Tensor<Real> mul(const Tensor<Real>& a, const Tensor<Real>& b) {
  require_same_shape(a, b, "mul");
  std::vector<Real> out(a.numel());
  const auto av = a.data(), bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return Tensor<Real>::make_result("mul", a.shape(), std::move(out), {a, b}, [a, b](auto& self) {
    if (auto da = grad_sink(a); !da.empty())
      for (std::size_t i = 0; i < da.size(); ++i) da[i] += self.grad[i] * b.data()[i];
    if (auto db = grad_sink(b); !db.empty())
      for (std::size_t i = 0; i < db.size(); ++i) db[i] += self.grad[i] * a.data()[i];
  });
}

template <typename Real>
Tensor<Real> scale(const Tensor<Real>& x, Real factor) {
  std::vector<Real> out(x.data().begin(), x.data().end());
  for (auto& v : out) v *= factor;
  return Tensor<Real>::make_result("scale", x.shape(), std::move(out), {x}, [x, factor](auto& self) {
    if (auto dx = grad_sink(x); !dx.empty())
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += self.grad[i] * factor;
  });
}

template <typename Real>
Tensor<Real> sum(const Tensor<Real>& x) {
  Real total = 0;
  for (auto v : x.data()) total += v;
  return Tensor<Real>::make_result("sum", {1}, {total}, {x}, [x](auto& self) {
    if (auto dx = grad_sink(x); !dx.empty())
      for (auto& d : dx) d += self.grad[0];
  });
}

template <typename Real>
Tensor<Real> mean(const Tensor<Real>& x) {
  return scale(sum(x), Real(1) / static_cast<Real>(x.numel()));
}

template <typename Real>
Tensor<Real> softmax_lastdim(const Tensor<Real>& x) {
  const std::size_t rows = x.rows(), cols = x.cols();
  std::vector<Real> out(x.numel());
  kp::softmax_rows<Real>(rows, cols, x.data(), out);
  auto result = Tensor<Real>::make_result("softmax", x.shape(), std::move(out), {x}, {});
  if (result.requires_grad()) {
    // The closure needs the output values; it reads them from the node it is
    // invoked on rather than capturing the result (which would form a cycle).
    result.node()->backward = [x, rows, cols](auto& self) {
      auto dx = grad_sink(x);
      if (dx.empty()) return;
      for (std::size_t r = 0; r < rows; ++r) {
        const Real* y = self.value.data() + r * cols;
        const Real* dy = self.grad.data() + r * cols;
        Real dot = 0;
        for (std::size_t j = 0; j < cols; ++j) dot += dy[j] * y[j];
        for (std::size_t j = 0; j < cols; ++j) dx[r * cols + j] += y[j] * (dy[j] - dot);
      }
    };
  }
  return result;
}

template <typename Real>
Tensor<Real> gelu(const Tensor<Real>& x) {
  const Real k = std::sqrt(Real(2) / std::numbers::pi_v<Real>);
  const Real c = Real(0.044715);
  std::vector<Real> out(x.numel());
  const auto xv = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Real v = xv[i];
    out[i] = Real(0.5) * v * (Real(1) + std::tanh(k * (v + c * v * v * v)));
  }
  return Tensor<Real>::make_result("gelu", x.shape(), std::move(out), {x}, [x, k, c](auto& self) {
    auto dx = grad_sink(x);
    if (dx.empty()) return;
    const auto xv = x.data();
    for (std::size_t i = 0; i < dx.size(); ++i) {
      const Real v = xv[i];
      const Real t = std::tanh(k * (v + c * v * v * v));
      const Real dt = (Real(1) - t * t) * k * (Real(1) + Real(3) * c * v * v);
      dx[i] += self.grad[i] * (Real(0.5) * (Real(1) + t) + Real(0.5) * v * dt);
    }
  });
}

template <typename Real>
Tensor<Real> layer_norm(const Tensor<Real>& x, const Tensor<Real>& gain, const Tensor<Real>& bias, Real eps) {
  const std::size_t rows = x.rows(), cols = x.cols();
  if (gain.numel() != cols || bias.numel() != cols)
    throw DimensionError("layer_norm: affine parameters must have " + std::to_string(cols) + " entries");
  std::vector<Real> normed(x.numel()), inv_std(rows), out(x.numel());
  const auto xv = x.data(), g = gain.data(), b = bias.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* row = xv.data() + r * cols;
    Real mu = 0;
    for (std::size_t j = 0; j < cols; ++j) mu += row[j];
    mu /= static_cast<Real>(cols);
    Real var = 0;
    for (std::size_t j = 0; j < cols; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<Real>(cols);
    inv_std[r] = Real(1) / std::sqrt(var + eps);
    for (std::size_t j = 0; j < cols; ++j) {
      normed[r * cols + j] = (row[j] - mu) * inv_std[r];
      out[r * cols + j] = normed[r * cols + j] * g[j] + b[j];
    }
  }
  return Tensor<Real>::make_result(
      "layer_norm", x.shape(), std::move(out), {x, gain, bias},
      [x, gain, bias, rows, cols, normed = std::move(normed), inv_std = std::move(inv_std)](auto& self) {
        const auto g = gain.data();
        auto dx = grad_sink(x);
        auto dg = grad_sink(gain);
        auto db = grad_sink(bias);
        std::vector<Real> dxhat(cols);
        for (std::size_t r = 0; r < rows; ++r) {
          const Real* dy = self.grad.data() + r * cols;
          const Real* xh = normed.data() + r * cols;
          if (!dx.empty()) {
            Real mean_d = 0, mean_dx = 0;
            for (std::size_t j = 0; j < cols; ++j) {
              dxhat[j] = dy[j] * g[j];
              mean_d += dxhat[j];
              mean_dx += dxhat[j] * xh[j];
            }
            mean_d /= static_cast<Real>(cols);
            mean_dx /= static_cast<Real>(cols);
            for (std::size_t j = 0; j < cols; ++j)
              dx[r * cols + j] += inv_std[r] * (dxhat[j] - mean_d - xh[j] * mean_dx);
          }
          if (!dg.empty())
            for (std::size_t j = 0; j < cols; ++j) dg[j] += dy[j] * xh[j];
          if (!db.empty())
            for (std::size_t j = 0; j < cols; ++j) db[j] += dy[j];
        }
      });
}

template <typename Real>
Tensor<Real> conv2d(const Tensor<Real>& x, const Tensor<Real>& w, const Tensor<Real>& bias, const ConvSpec& spec) {
  if (x.rank() != 3) throw DimensionError("conv2d: input must be [H, W, C], got " + shape_str(x.shape()));
  if (w.rank() != 4 || w.dim(0) != spec.kernel || w.dim(1) != spec.kernel)
    throw DimensionError("conv2d: weight " + shape_str(w.shape()) + " does not match kernel " +
                         std::to_string(spec.kernel));
  kernels::ConvGeometry g;
  g.in_h = x.dim(0);
  g.in_w = x.dim(1);
  g.in_c = x.dim(2);
  g.kernel = spec.kernel;
  g.stride = spec.stride;
  g.pad = spec.pad;
  g.groups = spec.groups;
  g.out_c = w.dim(3);
  if (g.groups == 0 || g.in_c % g.groups != 0 || g.out_c % g.groups != 0 || w.dim(2) != g.in_c / g.groups)
    throw DimensionError("conv2d: channel/group mismatch for weight " + shape_str(w.shape()));
  if (bias.defined() && bias.numel() != g.out_c) throw DimensionError("conv2d: bias size mismatch");
  g.out_h = conv_output_extent(g.in_h, g.kernel, g.stride, g.pad);
  g.out_w = conv_output_extent(g.in_w, g.kernel, g.stride, g.pad);
  std::vector<Real> out(g.out_h * g.out_w * g.out_c);
  kp::conv2d_forward<Real>(g, x.data(), w.data(), bias.defined() ? bias.data() : std::span<const Real>{}, out);
  return Tensor<Real>::make_result("conv2d", {g.out_h, g.out_w, g.out_c}, std::move(out), {x, w, bias},
                                   [x, w, bias, g](auto& self) {
                                     if (auto dx = grad_sink(x); !dx.empty())
                                       kp::conv2d_backward_input<Real>(g, self.grad, w.data(), dx);
                                     auto dw = grad_sink(w);
                                     auto db = grad_sink(bias);
                                     if (!dw.empty() || !db.empty())
                                       kp::conv2d_backward_weight<Real>(g, x.data(), self.grad, dw, db);
                                   });
}

namespace {

// Source row/column pair and weight of the far sample for one output index.
struct Tap {
  std::size_t lo, hi;
  double frac;
};

std::vector<Tap> bilinear_taps(std::size_t in, std::size_t factor) {
  std::vector<Tap> taps(in * factor);
  for (std::size_t o = 0; o < taps.size(); ++o) {
    double src = (static_cast<double>(o) + 0.5) / static_cast<double>(factor) - 0.5;
    if (src < 0) src = 0;
    auto lo = static_cast<std::size_t>(src);
    lo = std::min(lo, in - 1);
    const std::size_t hi = std::min(lo + 1, in - 1);
    taps[o] = {lo, hi, src - static_cast<double>(lo)};
  }
  return taps;
}

}  // namespace

template <typename Real>
Tensor<Real> bilinear_upsample(const Tensor<Real>& x, std::size_t factor) {
  if (factor == 0) throw ArgumentError("bilinear_upsample: factor must be >= 1");
  if (x.rank() != 3) throw DimensionError("bilinear_upsample: input must be [h, w, c]");
  const std::size_t h = x.dim(0), w = x.dim(1), c = x.dim(2);
  const std::size_t oh = h * factor, ow = w * factor;
  auto ty = bilinear_taps(h, factor), tx = bilinear_taps(w, factor);
  std::vector<Real> out(oh * ow * c);
  const auto xv = x.data();
  for (std::size_t oy = 0; oy < oh; ++oy) {
    const Real fy = static_cast<Real>(ty[oy].frac);
    for (std::size_t ox = 0; ox < ow; ++ox) {
      const Real fx = static_cast<Real>(tx[ox].frac);
      const Real* p00 = xv.data() + (ty[oy].lo * w + tx[ox].lo) * c;
      const Real* p01 = xv.data() + (ty[oy].lo * w + tx[ox].hi) * c;
      const Real* p10 = xv.data() + (ty[oy].hi * w + tx[ox].lo) * c;
      const Real* p11 = xv.data() + (ty[oy].hi * w + tx[ox].hi) * c;
      Real* o = out.data() + (oy * ow + ox) * c;
      for (std::size_t ch = 0; ch < c; ++ch) {
        const Real top = p00[ch] * (Real(1) - fx) + p01[ch] * fx;
        const Real bottom = p10[ch] * (Real(1) - fx) + p11[ch] * fx;
        o[ch] = top * (Real(1) - fy) + bottom * fy;
      }
    }
  }
  return Tensor<Real>::make_result(
      "bilinear_upsample", {oh, ow, c}, std::move(out), {x},
      [x, w, c, oh, ow, ty = std::move(ty), tx = std::move(tx)](auto& self) {
        auto dx = grad_sink(x);
        if (dx.empty()) return;
        for (std::size_t oy = 0; oy < oh; ++oy) {
          const Real fy = static_cast<Real>(ty[oy].frac);
          for (std::size_t ox = 0; ox < ow; ++ox) {
            const Real fx = static_cast<Real>(tx[ox].frac);
            const Real* g = self.grad.data() + (oy * ow + ox) * c;
            Real* d00 = dx.data() + (ty[oy].lo * w + tx[ox].lo) * c;
            Real* d01 = dx.data() + (ty[oy].lo * w + tx[ox].hi) * c;
            Real* d10 = dx.data() + (ty[oy].hi * w + tx[ox].lo) * c;
            Real* d11 = dx.data() + (ty[oy].hi * w + tx[ox].hi) * c;
            for (std::size_t ch = 0; ch < c; ++ch) {
              d00[ch] += g[ch] * (Real(1) - fy) * (Real(1) - fx);
              d01[ch] += g[ch] * (Real(1) - fy) * fx;
              d10[ch] += g[ch] * fy * (Real(1) - fx);
              d11[ch] += g[ch] * fy * fx;
            }
          }
        }
      });
}

template <typename Real>
Tensor<Real> reshape(const Tensor<Real>& x, Shape shape) {
  if (shape_numel(shape) != x.numel())
    throw DimensionError("reshape: " + shape_str(x.shape()) + " -> " + shape_str(shape));
  std::vector<Real> out(x.data().begin(), x.data().end());
  return Tensor<Real>::make_result("reshape", std::move(shape), std::move(out), {x}, [x](auto& self) {
    if (auto dx = grad_sink(x); !dx.empty())
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += self.grad[i];
  });
}

template <typename Real>
Tensor<Real> concat_lastdim(const std::vector<Tensor<Real>>& parts) {
  if (parts.empty()) throw DimensionError("concat_lastdim: nothing to concatenate");
  const std::size_t rows = parts.front().rows();
  Shape lead = parts.front().shape();
  lead.pop_back();
  std::size_t total = 0;
  for (const auto& p : parts) {
    Shape l = p.shape();
    l.pop_back();
    if (l != lead) throw DimensionError("concat_lastdim: leading extents differ");
    total += p.cols();
  }
  std::vector<Real> out(rows * total);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t c = p.cols();
    const auto v = p.data();
    for (std::size_t r = 0; r < rows; ++r) std::copy_n(v.data() + r * c, c, out.data() + r * total + offset);
    offset += c;
  }
  Shape shape = lead;
  shape.push_back(total);
  return Tensor<Real>::make_result("concat", std::move(shape), std::move(out), parts, [parts, rows, total](auto& self) {
    std::size_t offset = 0;
    for (const auto& p : parts) {
      const std::size_t c = p.cols();
      if (auto d = grad_sink(p); !d.empty())
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t j = 0; j < c; ++j) d[r * c + j] += self.grad[r * total + offset + j];
      offset += c;
    }
  });
}

template <typename Real>
Tensor<Real> slice_lastdim(const Tensor<Real>& x, std::size_t start, std::size_t length) {
  const std::size_t rows = x.rows(), cols = x.cols();
  if (length == 0 || start + length > cols)
    throw DimensionError("slice_lastdim: [" + std::to_string(start) + ", +" + std::to_string(length) +
                         ") outside " + std::to_string(cols) + " columns");
  std::vector<Real> out(rows * length);
  const auto v = x.data();
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(v.data() + r * cols + start, length, out.data() + r * length);
  Shape shape = x.shape();
  shape.back() = length;
  return Tensor<Real>::make_result("slice", std::move(shape), std::move(out), {x}, [x, rows, cols, start, length](auto& self) {
    if (auto dx = grad_sink(x); !dx.empty())
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < length; ++j) dx[r * cols + start + j] += self.grad[r * length + j];
  });
}

template <typename Real>
Tensor<Real> space_to_depth(const Tensor<Real>& x, std::size_t r) {
  if (x.rank() != 3) throw DimensionError("space_to_depth: input must be [H, W, c]");
  const std::size_t h = x.dim(0), w = x.dim(1), c = x.dim(2);
  if (r == 0 || h % r != 0 || w % r != 0)
    throw ConfigError("space_to_depth: reduction " + std::to_string(r) + " does not tile a " + std::to_string(h) +
                      "x" + std::to_string(w) + " grid");
  const std::size_t oh = h / r, ow = w / r, oc = r * r * c;
  // Index map from output position to input position, shared by both passes.
  std::vector<std::size_t> src(oh * ow * oc);
  for (std::size_t by = 0; by < oh; ++by)
    for (std::size_t bx = 0; bx < ow; ++bx)
      for (std::size_t dy = 0; dy < r; ++dy)
        for (std::size_t dx = 0; dx < r; ++dx)
          for (std::size_t ch = 0; ch < c; ++ch)
            src[(by * ow + bx) * oc + (dy * r + dx) * c + ch] = ((by * r + dy) * w + bx * r + dx) * c + ch;
  std::vector<Real> out(src.size());
  const auto v = x.data();
  for (std::size_t i = 0; i < src.size(); ++i) out[i] = v[src[i]];
  return Tensor<Real>::make_result("space_to_depth", {oh, ow, oc}, std::move(out), {x},
                                   [x, src = std::move(src)](auto& self) {
                                     if (auto dx = grad_sink(x); !dx.empty())
                                       for (std::size_t i = 0; i < src.size(); ++i) dx[src[i]] += self.grad[i];
                                   });
}

template <typename Real>
Tensor<Real> cross_entropy_2class(const Tensor<Real>& logits, std::span<const std::uint8_t> labels) {
  if (logits.cols() != 2) throw DimensionError("cross_entropy_2class: logits need 2 channels");
  const std::size_t n = logits.rows();
  if (labels.size() != n)
    throw DimensionError("cross_entropy_2class: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(n) + " pixels");
  for (std::size_t i = 0; i < n; ++i)
    if (labels[i] > 1) throw ArgumentError("cross_entropy_2class: label value " + std::to_string(labels[i]) +
                                           " at pixel " + std::to_string(i) + " is not in {0, 1}");
  const auto z = logits.data();
  std::vector<Real> prob1(n);
  Real total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Real a = z[2 * i], b = z[2 * i + 1];
    const Real peak = std::max(a, b);
    const Real lse = peak + std::log(std::exp(a - peak) + std::exp(b - peak));
    total += lse - (labels[i] ? b : a);
    prob1[i] = std::exp(b - lse);
  }
  std::vector<std::uint8_t> y(labels.begin(), labels.end());
  return Tensor<Real>::make_result(
      "cross_entropy", {1}, {total / static_cast<Real>(n)}, {logits},
      [logits, n, prob1 = std::move(prob1), y = std::move(y)](auto& self) {
        auto dz = grad_sink(logits);
        if (dz.empty()) return;
        const Real g = self.grad[0] / static_cast<Real>(n);
        for (std::size_t i = 0; i < n; ++i) {
          const Real p1 = prob1[i];
          dz[2 * i] += g * ((Real(1) - p1) - (y[i] == 0 ? Real(1) : Real(0)));
          dz[2 * i + 1] += g * (p1 - (y[i] == 1 ? Real(1) : Real(0)));
        }
      });
}

#define MTLSEG_INSTANTIATE(Real)                                                                     \
  template Tensor<Real> matmul(const Tensor<Real>&, const Tensor<Real>&);                            \
  template Tensor<Real> matmul_nt(const Tensor<Real>&, const Tensor<Real>&);                         \
  template Tensor<Real> linear(const Tensor<Real>&, const Tensor<Real>&, const Tensor<Real>&);       \
  template Tensor<Real> add(const Tensor<Real>&, const Tensor<Real>&);                               \
  template Tensor<Real> mul(const Tensor<Real>&, const Tensor<Real>&);                               \
  template Tensor<Real> scale(const Tensor<Real>&, Real);                                            \
  template Tensor<Real> sum(const Tensor<Real>&);                                                    \
  template Tensor<Real> mean(const Tensor<Real>&);                                                   \
  template Tensor<Real> softmax_lastdim(const Tensor<Real>&);                                        \
  template Tensor<Real> gelu(const Tensor<Real>&);                                                   \
  template Tensor<Real> layer_norm(const Tensor<Real>&, const Tensor<Real>&, const Tensor<Real>&, Real); \
  template Tensor<Real> conv2d(const Tensor<Real>&, const Tensor<Real>&, const Tensor<Real>&, const ConvSpec&); \
  template Tensor<Real> bilinear_upsample(const Tensor<Real>&, std::size_t);                         \
  template Tensor<Real> reshape(const Tensor<Real>&, Shape);                                         \
  template Tensor<Real> concat_lastdim(const std::vector<Tensor<Real>>&);                            \
  template Tensor<Real> slice_lastdim(const Tensor<Real>&, std::size_t, std::size_t);                \
  template Tensor<Real> space_to_depth(const Tensor<Real>&, std::size_t);                            \
  template Tensor<Real> cross_entropy_2class(const Tensor<Real>&, std::span<const std::uint8_t>);

MTLSEG_INSTANTIATE(float)
MTLSEG_INSTANTIATE(double)
#undef MTLSEG_INSTANTIATE

}  // namespace mtlseg::ops
