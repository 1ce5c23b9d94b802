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

// Independent reference implementations used only by the tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

inline std::vector<std::uint8_t> random_mask(std::mt19937_64& rng, std::size_t n, double density) {
  std::bernoulli_distribution bit(density);
  std::vector<std::uint8_t> m(n);
  for (auto& x : m) x = bit(rng) ? 1 : 0;
  return m;
}

/// Plain triple loop: out[y][x][o] = b[o] + sum x[iy][ix][ci] * w[ky][kx][ci'][o].
inline std::vector<double> conv2d(const std::vector<double>& x, std::size_t h, std::size_t w, std::size_t cin,
                                  const std::vector<double>& wt, const std::vector<double>& bias, std::size_t cout,
                                  std::size_t k, std::size_t stride, std::size_t pad, std::size_t groups) {
  const std::size_t oh = (h + 2 * pad - k) / stride + 1, ow = (w + 2 * pad - k) / stride + 1;
  const std::size_t cig = cin / groups, cog = cout / groups;
  std::vector<double> out(oh * ow * cout, 0.0);
  for (std::size_t oy = 0; oy < oh; ++oy)
    for (std::size_t ox = 0; ox < ow; ++ox)
      for (std::size_t o = 0; o < cout; ++o) {
        const std::size_t g = o / cog;
        double acc = bias.empty() ? 0.0 : bias[o];
        for (std::size_t ky = 0; ky < k; ++ky)
          for (std::size_t kx = 0; kx < k; ++kx) {
            const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
            const long ix = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
            if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(w)) continue;
            for (std::size_t c = 0; c < cig; ++c)
              acc += x[(static_cast<std::size_t>(iy) * w + static_cast<std::size_t>(ix)) * cin + g * cig + c] *
                     wt[((ky * k + kx) * cig + c) * cout + o];
          }
        out[(oy * ow + ox) * cout + o] = acc;
      }
  return out;
}

/// Dilation by literal definition: p is on iff some set q has p - q in [-a, e-1-a]^2.
inline std::vector<std::uint8_t> dilate(const std::vector<std::uint8_t>& m, std::size_t h, std::size_t w, std::size_t e) {
  const long a = static_cast<long>((e - 1) / 2), b = static_cast<long>(e) - 1 - a;
  std::vector<std::uint8_t> out(m.size(), 0);
  for (long qy = 0; qy < static_cast<long>(h); ++qy)
    for (long qx = 0; qx < static_cast<long>(w); ++qx) {
      if (!m[static_cast<std::size_t>(qy) * w + static_cast<std::size_t>(qx)]) continue;
      for (long dy = -a; dy <= b; ++dy)
        for (long dx = -a; dx <= b; ++dx) {
          const long y = qy + dy, x = qx + dx;
          if (y >= 0 && x >= 0 && y < static_cast<long>(h) && x < static_cast<long>(w))
            out[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)] = 1;
        }
    }
  return out;
}

/// Squared distance to the nearest set pixel by exhaustive search.
inline std::vector<double> squared_distance(const std::vector<std::uint8_t>& m, std::size_t h, std::size_t w) {
  std::vector<double> out(m.size(), std::numeric_limits<double>::infinity());
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t qy = 0; qy < h; ++qy)
        for (std::size_t qx = 0; qx < w; ++qx) {
          if (!m[qy * w + qx]) continue;
          const double dy = static_cast<double>(y) - static_cast<double>(qy);
          const double dx = static_cast<double>(x) - static_cast<double>(qx);
          out[y * w + x] = std::min(out[y * w + x], dy * dy + dx * dx);
        }
  return out;
}

/// Number of 8-connected foreground components.
inline std::size_t components8(const std::vector<std::uint8_t>& m, std::size_t h, std::size_t w) {
  std::vector<std::uint8_t> seen(m.size(), 0);
  std::size_t count = 0;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < m.size(); ++s) {
    if (!m[s] || seen[s]) continue;
    ++count;
    seen[s] = 1;
    stack.push_back(s);
    while (!stack.empty()) {
      const auto i = stack.back();
      stack.pop_back();
      const long y = static_cast<long>(i / w), x = static_cast<long>(i % w);
      for (long dy = -1; dy <= 1; ++dy)
        for (long dx = -1; dx <= 1; ++dx) {
          const long ny = y + dy, nx = x + dx;
          if (ny < 0 || nx < 0 || ny >= static_cast<long>(h) || nx >= static_cast<long>(w)) continue;
          const auto j = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
          if (m[j] && !seen[j]) {
            seen[j] = 1;
            stack.push_back(j);
          }
        }
    }
  }
  return count;
}

inline bool has_full_2x2(const std::vector<std::uint8_t>& m, std::size_t h, std::size_t w) {
  for (std::size_t y = 0; y + 1 < h; ++y)
    for (std::size_t x = 0; x + 1 < w; ++x)
      if (m[y * w + x] && m[y * w + x + 1] && m[(y + 1) * w + x] && m[(y + 1) * w + x + 1]) return true;
  return false;
}

/// Smooth random blobs: union of random discs.
inline std::vector<std::uint8_t> random_blobs(std::mt19937_64& rng, std::size_t h, std::size_t w, std::size_t discs) {
  std::uniform_real_distribution<double> py(0, static_cast<double>(h)), px(0, static_cast<double>(w)), pr(1.5, 6.0);
  std::vector<std::uint8_t> m(h * w, 0);
  for (std::size_t d = 0; d < discs; ++d) {
    const double cy = py(rng), cx = px(rng), r = pr(rng);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const double dy = static_cast<double>(y) - cy, dx = static_cast<double>(x) - cx;
        if (dy * dy + dx * dx <= r * r) m[y * w + x] = 1;
      }
  }
  return m;
}

}  // namespace oracle
