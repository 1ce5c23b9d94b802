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

#include "mtlseg/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mtlseg/errors.hpp"
#include "mtlseg/tiling.hpp"

namespace mtlseg {

namespace {

double ratio(std::size_t num, std::size_t den) { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }

double harmonic(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

// 1-D squared distance transform of sampled function f (lower envelope of
// parabolas).
void dt_1d(const double* f, std::size_t n, std::size_t stride, double* out, std::vector<std::size_t>& v,
           std::vector<double>& z) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  v.assign(n, 0);
  z.assign(n + 1, 0);
  std::size_t k = 0;
  bool any = false;
  for (std::size_t q = 0; q < n; ++q) {
    if (std::isinf(f[q * stride])) continue;
    if (!any) {
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      any = true;
      continue;
    }
    const auto fq = f[q * stride], dq = static_cast<double>(q);
    while (true) {
      const auto p = static_cast<double>(v[k]);
      const double s = ((fq + dq * dq) - (f[v[k] * stride] + p * p)) / (2 * dq - 2 * p);
      if (s <= z[k]) {
        if (k == 0) {
          v[0] = q;
          z[0] = -inf;
          z[1] = inf;
          break;
        }
        --k;
        continue;
      }
      ++k;
      v[k] = q;
      z[k] = s;
      z[k + 1] = inf;
      break;
    }
  }
  if (!any) {
    for (std::size_t q = 0; q < n; ++q) out[q * stride] = inf;
    return;
  }
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const auto dq = static_cast<double>(q);
    while (z[k + 1] < dq) ++k;
    const auto p = static_cast<double>(v[k]);
    out[q * stride] = (dq - p) * (dq - p) + f[v[k] * stride];
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << v;
  return os.str();
}

}  // namespace

SegCounts& SegCounts::operator+=(const SegCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

DetectionCounts& DetectionCounts::operator+=(const DetectionCounts& o) {
  pred += o.pred;
  tp += o.tp;
  gt += o.gt;
  matched += o.matched;
  return *this;
}

SegCounts seg_counts(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt, std::uint8_t cls) {
  if (pred.size() != gt.size())
    throw DimensionError("seg_counts: prediction has " + std::to_string(pred.size()) + " pixels, ground truth " +
                         std::to_string(gt.size()));
  SegCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == cls, g = gt[i] == cls;
    c.tp += p && g;
    c.fp += p && !g;
    c.fn += !p && g;
  }
  return c;
}

SegScores seg_scores(const SegCounts& c) {
  SegScores s;
  if (c.tp + c.fp + c.fn == 0) {
    s = {1, 1, 1, 1, true};
    return s;
  }
  s.precision = ratio(c.tp, c.tp + c.fp);
  s.recall = ratio(c.tp, c.tp + c.fn);
  s.f1 = harmonic(s.precision, s.recall);
  s.iou = ratio(c.tp, c.tp + c.fp + c.fn);
  return s;
}

SegScores seg_metrics(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt, std::uint8_t cls) {
  return seg_scores(seg_counts(pred, gt, cls));
}

std::vector<double> squared_distance_transform(std::span<const std::uint8_t> mask, std::size_t height, std::size_t width) {
  if (mask.size() != height * width) throw DimensionError("distance transform: mask size mismatch");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> f(mask.size()), cols(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) f[i] = mask[i] ? 0.0 : inf;
  std::vector<std::size_t> v;
  std::vector<double> z;
  for (std::size_t x = 0; x < width; ++x) dt_1d(f.data() + x, height, width, cols.data() + x, v, z);
  std::vector<double> out(mask.size());
  for (std::size_t y = 0; y < height; ++y) dt_1d(cols.data() + y * width, width, 1, out.data() + y * width, v, z);
  return out;
}

DetectionCounts detection_counts(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt, std::size_t height,
                                 std::size_t width, double d) {
  if (pred.size() != height * width || gt.size() != height * width)
    throw DimensionError("detection_counts: mask size mismatch");
  if (!(d >= 0)) throw ArgumentError("detection_counts: tolerance must be non-negative");
  const auto to_gt = squared_distance_transform(gt, height, width);
  const auto to_pred = squared_distance_transform(pred, height, width);
  const double d2 = d * d;
  DetectionCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i]) {
      ++c.pred;
      c.tp += to_gt[i] <= d2;
    }
    if (gt[i]) {
      ++c.gt;
      c.matched += to_pred[i] <= d2;
    }
  }
  return c;
}

DetectionScores detection_scores(const DetectionCounts& c) {
  DetectionScores s;
  if (c.pred == 0 && c.gt == 0) {
    s.precision = s.recall = s.f1 = 1;
    s.empty = true;
    return s;
  }
  s.precision_undefined = c.pred == 0;
  s.recall_undefined = c.gt == 0;
  s.precision = ratio(c.tp, c.pred);
  s.recall = ratio(c.matched, c.gt);
  s.f1 = harmonic(s.precision, s.recall);
  return s;
}

DetectionScores detection_f1(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gt, std::size_t height,
                             std::size_t width, double d) {
  return detection_scores(detection_counts(pred, gt, height, width, d));
}

std::string MetricsReport::to_key_values() const {
  std::ostringstream os;
  os << "samples=" << samples << '\n';
  os << "tolerance=" << fmt(tolerance) << '\n';
  auto seg_lines = [&](const std::string& prefix, const SegCounts& c) {
    const auto s = seg_scores(c);
    os << prefix << ".precision=" << fmt(s.precision) << '\n'
       << prefix << ".recall=" << fmt(s.recall) << '\n'
       << prefix << ".f1=" << fmt(s.f1) << '\n'
       << prefix << ".iou=" << fmt(s.iou) << '\n'
       << prefix << ".tp=" << c.tp << '\n'
       << prefix << ".fp=" << c.fp << '\n'
       << prefix << ".fn=" << c.fn << '\n'
       << prefix << ".empty=" << (s.empty ? 1 : 0) << '\n';
  };
  for (const auto& cls : classes) {
    seg_lines(cls.name, cls.seg);
    if (!cls.thin) continue;
    seg_lines(cls.name + ".raw", cls.seg_raw);
    const auto d = detection_scores(cls.det);
    const std::string p = cls.name + ".det";
    os << p << ".precision=" << fmt(d.precision) << '\n'
       << p << ".recall=" << fmt(d.recall) << '\n'
       << p << ".f1=" << fmt(d.f1) << '\n'
       << p << ".tp=" << cls.det.tp << '\n'
       << p << ".fp=" << cls.det.pred - cls.det.tp << '\n'
       << p << ".fn=" << cls.det.gt - cls.det.matched << '\n'
       << p << ".empty=" << (d.empty ? 1 : 0) << '\n'
       << p << ".recall_undefined=" << (d.recall_undefined ? 1 : 0) << '\n'
       << p << ".precision_undefined=" << (d.precision_undefined ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string MetricsReport::tsv_header() const {
  std::string out;
  for (const auto& c : classes) out += (out.empty() ? "" : "\t") + c.name + ".f1\t" + c.name + ".iou";
  return out;
}

std::string MetricsReport::tsv_row() const {
  std::string out;
  for (const auto& c : classes) {
    const auto s = seg_scores(c.seg);
    out += (out.empty() ? "" : "\t") + fmt(s.f1) + "\t" + fmt(s.iou);
  }
  return out;
}

MetricsReport evaluate_dataset(const Dataset& dataset, const SamplePredictor& predictor, const EvalOptions& options) {
  if (dataset.samples.empty()) throw ArgumentError("evaluate_dataset: dataset is empty");
  MetricsReport report;
  report.tolerance = options.tolerance;
  report.samples = dataset.samples.size();
  const std::size_t tasks = dataset.task_names.size();
  for (std::size_t k = 0; k < tasks; ++k)
    report.classes.push_back({dataset.task_names[k], k < dataset.thin.size() && dataset.thin[k], {}, {}, {}});

  for (const auto& s : dataset.samples) {
    const auto pred = predictor(s);
    if (pred.size() != s.height * s.width) throw DimensionError("evaluate_dataset: prediction size mismatch");
    const auto gt_raw = priority_labels(s.masks);
    std::vector<std::vector<std::uint8_t>> dilated;
    for (std::size_t k = 0; k < tasks; ++k)
      dilated.push_back(report.classes[k].thin ? dilate_mask(s.masks[k], s.height, s.width, options.dilation) : s.masks[k]);
    const auto gt_dilated = priority_labels(dilated);
    for (std::size_t k = 0; k < tasks; ++k) {
      auto& cls = report.classes[k];
      const auto label = static_cast<std::uint8_t>(k + 1);
      cls.seg += seg_counts(pred, gt_dilated, label);
      cls.seg_raw += seg_counts(pred, gt_raw, label);
      if (!cls.thin) continue;
      std::vector<std::uint8_t> mine(pred.size());
      for (std::size_t i = 0; i < pred.size(); ++i) mine[i] = pred[i] == label ? 1 : 0;
      cls.det += detection_counts(skeletonize(mine, s.height, s.width), s.masks[k], s.height, s.width, options.tolerance);
    }
  }
  return report;
}

}  // namespace mtlseg
