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

#include "mtlseg/tiling.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdlib>
#include <exception>
#include <string>

#include "mtlseg/errors.hpp"

namespace mtlseg {

namespace {

std::vector<std::size_t> axis_origins(std::size_t extent, std::size_t patch) {
  std::vector<std::size_t> out;
  const std::size_t stride = patch / 2;
  for (std::size_t o = 0; o + patch < extent; o += stride) out.push_back(o);
  out.push_back(extent - patch);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Neighbour offsets in the order P2..P9: N, NE, E, SE, S, SW, W, NW.
constexpr std::array<int, 8> kDy = {-1, -1, 0, 1, 1, 1, 0, -1};
constexpr std::array<int, 8> kDx = {0, 1, 1, 1, 0, -1, -1, -1};

// Simple point test for (8, 4) connectivity from the 8-bit neighbourhood
// code (bit i = neighbour i above): exactly one 8-connected foreground
// component in the ring and exactly one 4-connected background component
// touching a 4-neighbour.
bool simple_from_code(unsigned code) {
  auto on = [&](int i) { return ((code >> ((i + 8) % 8)) & 1u) != 0; };
  int fg = 0;
  {
    std::array<int, 8> label{};
    label.fill(-1);
    for (int s = 0; s < 8; ++s) {
      if (!on(s) || label[s] >= 0) continue;
      std::vector<int> stack{s};
      label[s] = fg;
      while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        for (int j = 0; j < 8; ++j) {
          if (!on(j) || label[j] >= 0) continue;
          const int dy = kDy[i] - kDy[j], dx = kDx[i] - kDx[j];
          if (std::abs(dy) <= 1 && std::abs(dx) <= 1) {
            label[j] = fg;
            stack.push_back(j);
          }
        }
      }
      ++fg;
    }
  }
  int bg = 0;
  {
    std::array<int, 8> label{};
    label.fill(-1);
    for (int s = 0; s < 8; s += 2) {  // start only from 4-neighbours
      if (on(s) || label[s] >= 0) continue;
      std::vector<int> stack{s};
      label[s] = bg;
      while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        for (int j = 0; j < 8; ++j) {
          if (on(j) || label[j] >= 0) continue;
          const int dy = kDy[i] - kDy[j], dx = kDx[i] - kDx[j];
          if (std::abs(dy) + std::abs(dx) == 1) {
            label[j] = bg;
            stack.push_back(j);
          }
        }
      }
      ++bg;
    }
  }
  return fg == 1 && bg == 1;
}

const std::array<bool, 256>& simple_table() {
  static const std::array<bool, 256> table = [] {
    std::array<bool, 256> t{};
    for (unsigned c = 0; c < 256; ++c) t[c] = simple_from_code(c);
    return t;
  }();
  return table;
}

class Thinner {
 public:
  Thinner(std::span<const std::uint8_t> mask, std::size_t h, std::size_t w)
      : h_(static_cast<std::ptrdiff_t>(h)), w_(static_cast<std::ptrdiff_t>(w)), img_(mask.begin(), mask.end()) {
    for (auto& v : img_) v = v ? 1 : 0;
  }

  std::vector<std::uint8_t> run() {
    bool changed = true;
    while (changed) {
      changed = false;
      while (subiteration(0) | subiteration(1)) changed = true;
      if (clear_blocks()) changed = true;
    }
    return std::move(img_);
  }

 private:
  std::uint8_t at(std::ptrdiff_t y, std::ptrdiff_t x) const {
    if (y < 0 || x < 0 || y >= h_ || x >= w_) return 0;
    return img_[static_cast<std::size_t>(y * w_ + x)];
  }

  unsigned code(std::ptrdiff_t y, std::ptrdiff_t x) const {
    unsigned c = 0;
    for (int i = 0; i < 8; ++i) c |= static_cast<unsigned>(at(y + kDy[i], x + kDx[i])) << i;
    return c;
  }

  bool deletable(std::ptrdiff_t y, std::ptrdiff_t x) const {
    const unsigned c = code(y, x);
    return std::popcount(c) >= 2 && simple_table()[c];
  }

  bool subiteration(int pass) {
    std::vector<std::ptrdiff_t> candidates;
    for (std::ptrdiff_t y = 0; y < h_; ++y)
      for (std::ptrdiff_t x = 0; x < w_; ++x) {
        if (!at(y, x)) continue;
        const unsigned c = code(y, x);
        const int b = std::popcount(c);
        if (b < 2 || b > 6) continue;
        int a = 0;
        for (int i = 0; i < 8; ++i) a += (!((c >> i) & 1u) && ((c >> ((i + 1) % 8)) & 1u)) ? 1 : 0;
        if (a != 1) continue;
        const bool n = c & 1u, e = c & 4u, s = c & 16u, wst = c & 64u;
        const bool ok = pass == 0 ? (!(n && e && s) && !(e && s && wst)) : (!(n && e && wst) && !(n && s && wst));
        if (ok) candidates.push_back(y * w_ + x);
      }
    bool changed = false;
    for (auto idx : candidates) {
      const auto y = idx / w_, x = idx % w_;
      if (deletable(y, x)) {
        img_[static_cast<std::size_t>(idx)] = 0;
        changed = true;
      }
    }
    return changed;
  }

  bool clear_blocks() {
    bool changed = false;
    for (std::ptrdiff_t y = 0; y + 1 < h_; ++y)
      for (std::ptrdiff_t x = 0; x + 1 < w_; ++x) {
        if (!(at(y, x) && at(y, x + 1) && at(y + 1, x) && at(y + 1, x + 1))) continue;
        for (auto [dy, dx] : {std::pair{0, 0}, {0, 1}, {1, 0}, {1, 1}}) {
          if (deletable(y + dy, x + dx)) {
            img_[static_cast<std::size_t>((y + dy) * w_ + x + dx)] = 0;
            changed = true;
            break;
          }
        }
      }
    return changed;
  }

  std::ptrdiff_t h_, w_;
  std::vector<std::uint8_t> img_;
};

}  // namespace

std::pair<std::size_t, std::size_t> TileGrid::origin(std::size_t i) const {
  return {row_origins[i / col_origins.size()], col_origins[i % col_origins.size()]};
}

TileGrid make_grid(std::size_t height, std::size_t width, std::size_t patch) {
  if (patch == 0 || patch % 2 != 0) throw ArgumentError("patch size " + std::to_string(patch) + " must be even and positive");
  if (patch > height || patch > width)
    throw ArgumentError("patch size " + std::to_string(patch) + " exceeds image extent " + std::to_string(height) + "x" +
                        std::to_string(width));
  return {height, width, patch, axis_origins(height, patch), axis_origins(width, patch)};
}

std::vector<std::uint8_t> merge_priority(const std::vector<PatchPrediction>& predictions, const TileGrid& grid) {
  if (predictions.size() != grid.size())
    throw ArgumentError("merge_priority: " + std::to_string(predictions.size()) + " patch predictions for a grid of " +
                        std::to_string(grid.size()));
  std::vector<std::uint8_t> labels(grid.height * grid.width, 0);
  const std::size_t p = grid.patch;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto [r0, c0] = grid.origin(i);
    if (predictions[i].empty()) throw ArgumentError("merge_priority: patch " + std::to_string(i) + " has no prediction");
    for (std::size_t k = 0; k < predictions[i].size(); ++k) {
      const auto& m = predictions[i][k];
      if (m.size() != p * p)
        throw ArgumentError("merge_priority: patch " + std::to_string(i) + " task " + std::to_string(k) + " mask size mismatch");
      const auto label = static_cast<std::uint8_t>(k + 1);
      for (std::size_t y = 0; y < p; ++y)
        for (std::size_t x = 0; x < p; ++x)
          if (m[y * p + x]) {
            auto& dst = labels[(r0 + y) * grid.width + c0 + x];
            dst = std::max(dst, label);
          }
    }
  }
  return labels;
}

std::vector<std::uint8_t> priority_labels(const std::vector<std::vector<std::uint8_t>>& masks) {
  if (masks.empty()) throw ArgumentError("priority_labels: no masks");
  std::vector<std::uint8_t> labels(masks[0].size(), 0);
  for (std::size_t k = 0; k < masks.size(); ++k) {
    if (masks[k].size() != labels.size()) throw DimensionError("priority_labels: mask size mismatch");
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (masks[k][i]) labels[i] = static_cast<std::uint8_t>(k + 1);
  }
  return labels;
}

std::vector<std::uint8_t> skeletonize(std::span<const std::uint8_t> mask, std::size_t height, std::size_t width) {
  if (mask.size() != height * width) throw DimensionError("skeletonize: mask size mismatch");
  return Thinner(mask, height, width).run();
}

template <typename Real>
PatchPredictor model_predictor(const MultiTaskSegmenter<Real>& model) {
  return [&model](std::span<const std::uint8_t> rgb, std::size_t patch) {
    NoGradGuard guard;
    const auto logits = model.forward(image_to_tensor<Real>(rgb, patch, patch));
    PatchPrediction out;
    for (const auto& l : logits) out.push_back(argmax_mask(l));
    return out;
  };
}

TiledResult infer_full(std::span<const std::uint8_t> rgb, std::size_t height, std::size_t width, std::size_t patch,
                       std::size_t tasks, const PatchPredictor& predictor) {
  if (rgb.size() != height * width * 3) throw DimensionError("infer_full: image size mismatch");
  const auto grid = make_grid(height, width, patch);
  std::vector<PatchPrediction> predictions(grid.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(grid.size()); ++si) {
    try {
      const auto i = static_cast<std::size_t>(si);
      const auto [r0, c0] = grid.origin(i);
      std::vector<std::uint8_t> crop(patch * patch * 3);
      for (std::size_t y = 0; y < patch; ++y)
        std::copy_n(rgb.begin() + static_cast<std::ptrdiff_t>(((r0 + y) * width + c0) * 3), patch * 3,
                    crop.begin() + static_cast<std::ptrdiff_t>(y * patch * 3));
      predictions[i] = predictor(crop, patch);
      if (predictions[i].size() != tasks)
        throw ArgumentError("infer_full: predictor returned " + std::to_string(predictions[i].size()) + " tasks, expected " +
                            std::to_string(tasks));
    } catch (...) {
#pragma omp critical(mtlseg_infer_full)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  TiledResult r{height, width, tasks, merge_priority(predictions, grid), {}};
  for (std::size_t k = 0; k < tasks; ++k) {
    std::vector<std::uint8_t> cls(r.labels.size());
    for (std::size_t i = 0; i < cls.size(); ++i) cls[i] = r.labels[i] == k + 1 ? 1 : 0;
    r.skeletons.push_back(skeletonize(cls, height, width));
  }
  return r;
}

std::uint8_t label_grey(std::uint8_t label, std::size_t tasks) {
  if (tasks == 0) return 0;
  return static_cast<std::uint8_t>((255 * static_cast<std::size_t>(label) + tasks - 1) / tasks);
}

template PatchPredictor model_predictor(const MultiTaskSegmenter<float>&);
template PatchPredictor model_predictor(const MultiTaskSegmenter<double>&);

}  // namespace mtlseg
