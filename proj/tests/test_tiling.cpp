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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <tuple>

#include "mtlseg/errors.hpp"
#include "mtlseg/tiling.hpp"
#include "oracles.hpp"

using namespace mtlseg;

namespace {

using Mask = std::vector<std::uint8_t>;

std::size_t count(const Mask& m) { return static_cast<std::size_t>(std::count(m.begin(), m.end(), 1)); }

/// Cuts every patch of `labels` back into per-task binary predictions.
std::vector<PatchPrediction> cut(const Mask& labels, const TileGrid& g, std::size_t tasks) {
  std::vector<PatchPrediction> out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto [r0, c0] = g.origin(i);
    PatchPrediction p(tasks, Mask(g.patch * g.patch, 0));
    for (std::size_t y = 0; y < g.patch; ++y)
      for (std::size_t x = 0; x < g.patch; ++x) {
        const auto l = labels[(r0 + y) * g.width + c0 + x];
        if (l) p[l - 1][y * g.patch + x] = 1;
      }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PatchPrediction> blank(const TileGrid& g, std::size_t tasks) {
  return std::vector<PatchPrediction>(g.size(), PatchPrediction(tasks, Mask(g.patch * g.patch, 0)));
}

/// Index of `pixel` inside patch i, when the patch covers it.
std::optional<std::size_t> local(const TileGrid& g, std::size_t i, std::size_t y, std::size_t x) {
  const auto [r0, c0] = g.origin(i);
  if (y < r0 || x < c0 || y >= r0 + g.patch || x >= c0 + g.patch) return std::nullopt;
  return (y - r0) * g.patch + (x - c0);
}

}  // namespace

TEST_SUITE("tiling") {
  TEST_CASE("grid origins") {
    const auto one = make_grid(64, 64, 64);
    CHECK(one.size() == 1);
    CHECK(one.origin(0) == std::pair<std::size_t, std::size_t>{0, 0});
    const auto nine = make_grid(128, 128, 64);
    CHECK(nine.size() == 9);
    CHECK(nine.row_origins == std::vector<std::size_t>{0, 32, 64});
    const auto odd = make_grid(100, 70, 32);
    CHECK(odd.row_origins.back() == 68);
    CHECK(odd.col_origins.back() == 38);
    CHECK_THROWS_AS(make_grid(64, 64, 31), ArgumentError);
    CHECK_THROWS_AS(make_grid(64, 64, 0), ArgumentError);
    CHECK_THROWS_AS(make_grid(64, 32, 64), ArgumentError);
  }

  TEST_CASE("patches cover every pixel and overlap in the interior") {
    for (auto [h, w, p] : {std::tuple<std::size_t, std::size_t, std::size_t>{128, 128, 64}, {100, 70, 32}, {96, 256, 32}}) {
      const auto g = make_grid(h, w, p);
      std::vector<std::size_t> cover(h * w, 0);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const auto [r0, c0] = g.origin(i);
        CHECK((r0 % (p / 2) == 0 || r0 + p == h));
        CHECK((c0 % (p / 2) == 0 || c0 + p == w));
        for (std::size_t y = r0; y < r0 + p; ++y)
          for (std::size_t x = c0; x < c0 + p; ++x) ++cover[y * w + x];
      }
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
          CHECK(cover[y * w + x] >= 1);
          if (y >= p / 2 && y < h - p / 2) CHECK(cover[y * w + x] >= 2);
        }
    }
  }

  TEST_CASE("gap beats line beats background") {
    const auto g = make_grid(64, 64, 32);
    // Pixel (24, 24) lies in the four patches with origins in {0, 16}^2.
    const std::size_t y = 24, x = 24;
    std::vector<std::size_t> covering;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (local(g, i, y, x)) covering.push_back(i);
    REQUIRE(covering.size() == 4);

    auto preds = blank(g, 2);
    CHECK(merge_priority(preds, g)[y * 64 + x] == 0);
    preds[covering[2]][1][*local(g, covering[2], y, x)] = 1;
    CHECK(merge_priority(preds, g)[y * 64 + x] == 2);
    for (auto i : covering) preds[i][0][*local(g, i, y, x)] = 1;
    CHECK(merge_priority(preds, g)[y * 64 + x] == 2);
    preds[covering[2]][1][*local(g, covering[2], y, x)] = 0;
    CHECK(merge_priority(preds, g)[y * 64 + x] == 1);

    CHECK(priority_labels({{1, 1, 0, 0}, {0, 1, 0, 1}}) == Mask{1, 2, 0, 2});
    preds.pop_back();
    CHECK_THROWS_AS(merge_priority(preds, g), ArgumentError);
    auto short_mask = blank(g, 2);
    short_mask[0][1].resize(10);
    CHECK_THROWS_AS(merge_priority(short_mask, g), ArgumentError);
  }

  TEST_CASE("merging is idempotent and independent of patch order") {
    std::mt19937_64 rng(4);
    const auto g = make_grid(96, 96, 32);
    std::vector<PatchPrediction> preds;
    for (std::size_t i = 0; i < g.size(); ++i)
      preds.push_back({oracle::random_mask(rng, 1024, 0.2), oracle::random_mask(rng, 1024, 0.05)});
    const auto merged = merge_priority(preds, g);
    CHECK(merge_priority(cut(merged, g, 2), g) == merged);
    // Reference: max over covering patches, visited in reverse order.
    Mask ref(96 * 96, 0);
    for (std::size_t i = g.size(); i-- > 0;) {
      const auto [r0, c0] = g.origin(i);
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t y = 0; y < 32; ++y)
          for (std::size_t x = 0; x < 32; ++x)
            if (preds[i][k][y * 32 + x])
              ref[(r0 + y) * 96 + c0 + x] = std::max<std::uint8_t>(ref[(r0 + y) * 96 + c0 + x], static_cast<std::uint8_t>(k + 1));
    }
    CHECK(merged == ref);
  }

  TEST_CASE("skeletons of trivial masks") {
    CHECK(count(skeletonize(Mask(100, 0), 10, 10)) == 0);
    Mask dot(100, 0);
    dot[45] = 1;
    CHECK(skeletonize(dot, 10, 10) == dot);
  }

  TEST_CASE("a wide bar thins to its centre line") {
    const std::size_t h = 20, w = 50;
    Mask bar(h * w, 0);
    for (std::size_t y = 7; y < 13; ++y)
      for (std::size_t x = 5; x < 45; ++x) bar[y * w + x] = 1;
    const auto sk = skeletonize(bar, h, w);
    std::size_t min_x = w, max_x = 0;
    for (std::size_t x = 0; x < w; ++x) {
      std::size_t in_column = 0;
      for (std::size_t y = 0; y < h; ++y)
        if (sk[y * w + x]) {
          ++in_column;
          CHECK(y >= 7);
          CHECK(y <= 12);
          min_x = std::min(min_x, x);
          max_x = std::max(max_x, x);
        }
      CHECK(in_column <= 1);
    }
    // Away from the ends the line runs along the two central rows.
    for (std::size_t x = 10; x < 40; ++x) CHECK((sk[9 * w + x] || sk[10 * w + x]));
    const auto extent = max_x - min_x + 1;
    CHECK(extent >= 37);
    CHECK(extent <= 43);
    CHECK(oracle::components8(sk, h, w) == 1);
  }

  TEST_CASE("skeletons of random blobs keep topology and lose every 2x2 block") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
      CAPTURE(trial);
      const auto m = oracle::random_blobs(rng, 48, 48, 1 + rng() % 6);
      const auto sk = skeletonize(m, 48, 48);
      CHECK_FALSE(oracle::has_full_2x2(sk, 48, 48));
      CHECK(oracle::components8(sk, 48, 48) == oracle::components8(m, 48, 48));
      for (std::size_t i = 0; i < m.size(); ++i) CHECK((!sk[i] || m[i]));
      CHECK(skeletonize(sk, 48, 48) == sk);
    }
  }

  TEST_CASE("full-image inference on a single patch equals the patch prediction") {
    std::mt19937_64 rng(7);
    std::vector<std::uint8_t> rgb(64 * 64 * 3);
    for (auto& v : rgb) v = static_cast<std::uint8_t>(rng());
    const PatchPredictor threshold = [](std::span<const std::uint8_t> p, std::size_t n) {
      PatchPrediction out(2, Mask(n * n, 0));
      for (std::size_t i = 0; i < n * n; ++i) {
        out[0][i] = p[i * 3] > 100;
        out[1][i] = p[i * 3 + 1] > 200;
      }
      return out;
    };
    const auto r = infer_full(rgb, 64, 64, 64, 2, threshold);
    CHECK(r.labels == priority_labels(threshold(rgb, 64)));
    CHECK(infer_full(rgb, 64, 64, 64, 2, threshold).labels == r.labels);
    const auto tiled = infer_full(rgb, 64, 64, 32, 2, threshold);
    // A pointwise predictor is seam-free: tiling cannot change the answer.
    CHECK(tiled.labels == r.labels);
    CHECK(label_grey(0, 2) == 0);
    CHECK(label_grey(1, 2) == 128);
    CHECK(label_grey(2, 2) == 255);
  }

  TEST_CASE("a line across tile seams stays one connected skeleton") {
    const std::size_t n = 128;
    std::vector<std::uint8_t> rgb(n * n * 3, 0);
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x) {
        const double d = std::abs(0.45 * static_cast<double>(x) - static_cast<double>(y) + 30.0) / std::hypot(0.45, 1.0);
        if (d <= 2.5) rgb[(y * n + x) * 3 + 1] = 255;
      }
    // Patches see only their own pixels; a border crop of the band is still
    // marked, so adjacent patches agree on the overlap.
    const PatchPredictor green = [](std::span<const std::uint8_t> p, std::size_t s) {
      PatchPrediction out(2, Mask(s * s, 0));
      for (std::size_t i = 0; i < s * s; ++i) out[0][i] = p[i * 3 + 1] > 128;
      return out;
    };
    const auto r = infer_full(rgb, n, n, 32, 2, green);
    const auto& sk = r.skeletons[0];
    CHECK(oracle::components8(sk, n, n) == 1);
    std::size_t min_x = n, max_x = 0;
    for (std::size_t i = 0; i < sk.size(); ++i)
      if (sk[i]) {
        min_x = std::min(min_x, i % n);
        max_x = std::max(max_x, i % n);
      }
    CHECK(min_x < 8);
    CHECK(max_x > n - 8);
    CHECK(count(r.skeletons[1]) == 0);
  }
}
