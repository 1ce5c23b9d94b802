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

#include "mtlseg/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "mtlseg/errors.hpp"
#include "mtlseg/image_io.hpp"

namespace mtlseg {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

std::uint8_t clamp_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

// Smooth random field in roughly [-1, 1]: bilinear interpolation of a coarse
// grid of random values.
std::vector<double> value_noise(Rng& rng, std::size_t h, std::size_t w, std::size_t cell) {
  const std::size_t gh = h / cell + 2, gw = w / cell + 2;
  std::vector<double> grid(gh * gw);
  for (auto& v : grid) v = uniform(rng, -1, 1);
  std::vector<double> out(h * w);
  for (std::size_t y = 0; y < h; ++y) {
    const double fy = static_cast<double>(y) / static_cast<double>(cell);
    const auto y0 = static_cast<std::size_t>(fy);
    const double ty = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < w; ++x) {
      const double fx = static_cast<double>(x) / static_cast<double>(cell);
      const auto x0 = static_cast<std::size_t>(fx);
      const double tx = fx - static_cast<double>(x0);
      const double a = grid[y0 * gw + x0], b = grid[y0 * gw + x0 + 1];
      const double c = grid[(y0 + 1) * gw + x0], d = grid[(y0 + 1) * gw + x0 + 1];
      out[y * w + x] = (a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty;
    }
  }
  return out;
}

struct Color {
  double r, g, b;
};

// Soil-like background with low-frequency variation and pixel noise.
std::vector<Color> soil_background(Rng& rng, std::size_t h, std::size_t w, double texture) {
  const auto coarse = value_noise(rng, h, w, 16);
  const auto fine = value_noise(rng, h, w, 4);
  std::normal_distribution<double> pixel(0.0, 1.0);
  std::vector<Color> bg(h * w);
  for (std::size_t i = 0; i < bg.size(); ++i) {
    const double shade = 18.0 * coarse[i] + 10.0 * texture * fine[i] + 8.0 * texture * pixel(rng);
    bg[i] = {128 + shade, 96 + 0.8 * shade, 70 + 0.6 * shade};
  }
  return bg;
}

void paint_disc(std::vector<Color>& canvas, std::size_t h, std::size_t w, double cy, double cx, double radius,
                const std::function<Color(std::size_t)>& color) {
  const auto y0 = static_cast<std::ptrdiff_t>(std::floor(cy - radius));
  const auto y1 = static_cast<std::ptrdiff_t>(std::ceil(cy + radius));
  const auto x0 = static_cast<std::ptrdiff_t>(std::floor(cx - radius));
  const auto x1 = static_cast<std::ptrdiff_t>(std::ceil(cx + radius));
  for (auto y = std::max<std::ptrdiff_t>(y0, 0); y <= std::min<std::ptrdiff_t>(y1, static_cast<std::ptrdiff_t>(h) - 1); ++y)
    for (auto x = std::max<std::ptrdiff_t>(x0, 0); x <= std::min<std::ptrdiff_t>(x1, static_cast<std::ptrdiff_t>(w) - 1); ++x) {
      const double dy = static_cast<double>(y) - cy, dx = static_cast<double>(x) - cx;
      if (dy * dy + dx * dx <= radius * radius) {
        const auto i = static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x);
        canvas[i] = color(i);
      }
    }
}

std::vector<std::uint8_t> to_bytes(const std::vector<Color>& canvas) {
  std::vector<std::uint8_t> out(canvas.size() * 3);
  for (std::size_t i = 0; i < canvas.size(); ++i) {
    out[3 * i] = clamp_byte(canvas[i].r);
    out[3 * i + 1] = clamp_byte(canvas[i].g);
    out[3 * i + 2] = clamp_byte(canvas[i].b);
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require_frame(std::size_t h, std::size_t w) {
  if (h == 0 || w == 0 || h % 32 != 0 || w % 32 != 0)
    throw ParameterError("scene extents " + std::to_string(h) + "x" + std::to_string(w) + " must be multiples of 32");
}

}  // namespace

std::string Sample::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return v;
  return {};
}

Sample gen_crop_scene(const CropSceneParams& p) {
  require_frame(p.height, p.width);
  if (p.thickness <= 0) throw ParameterError("crop scene: thickness must be positive");
  if (p.line_spacing <= p.thickness)
    throw ParameterError("crop scene: line spacing " + fmt(p.line_spacing) + " must exceed thickness " + fmt(p.thickness));
  if (p.line_count == 0) throw ParameterError("crop scene: need at least one line");
  if (p.gap_count > 0 && p.gap_length < 1) throw ParameterError("crop scene: gap length must be >= 1");

  Rng rng(p.seed);
  const std::size_t h = p.height, w = p.width;
  const double dx = std::cos(p.angle), dy = std::sin(p.angle);
  const double nx = -dy, ny = dx;
  const double cx = (static_cast<double>(w) - 1) / 2, cy = (static_cast<double>(h) - 1) / 2;
  const bool along_x = std::abs(dx) >= std::abs(dy);
  const double phase = uniform(rng, -0.5, 0.5) * p.line_spacing;

  // Trajectory pixels of each row, ordered along the dominant axis.
  std::vector<std::vector<std::size_t>> rows;
  for (std::size_t i = 0; i < p.line_count; ++i) {
    const double offset = (static_cast<double>(i) - (static_cast<double>(p.line_count) - 1) / 2) * p.line_spacing + phase;
    const double ox = cx + offset * nx, oy = cy + offset * ny;
    std::vector<std::size_t> pixels;
    const std::size_t steps = along_x ? w : h;
    for (std::size_t s = 0; s < steps; ++s) {
      double fy, fx;
      if (along_x) {
        fx = static_cast<double>(s);
        fy = oy + (fx - ox) * dy / dx;
      } else {
        fy = static_cast<double>(s);
        fx = ox + (fy - oy) * dx / dy;
      }
      const long ry = std::lround(fy), rx = std::lround(fx);
      if (ry < 0 || rx < 0 || ry >= static_cast<long>(h) || rx >= static_cast<long>(w)) continue;
      pixels.push_back(static_cast<std::size_t>(ry) * w + static_cast<std::size_t>(rx));
    }
    if (!pixels.empty()) rows.push_back(std::move(pixels));
  }

  std::vector<std::uint8_t> line(h * w, 0), gap(h * w, 0);
  for (const auto& r : rows)
    for (auto px : r) line[px] = 1;

  const auto gap_len = static_cast<std::size_t>(std::lround(p.gap_length));
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].size() >= gap_len + 6) eligible.push_back(i);
  for (std::size_t g = 0; g < p.gap_count && !eligible.empty(); ++g) {
    const auto& r = rows[eligible[uniform_int(rng, 0, eligible.size() - 1)]];
    const std::size_t start = uniform_int(rng, 3, r.size() - gap_len - 3);
    for (std::size_t k = start; k < start + gap_len; ++k) gap[r[k]] = 1;
  }
  for (std::size_t i = 0; i < line.size(); ++i)
    if (gap[i]) line[i] = 0;

  auto bg = soil_background(rng, h, w, p.background_texture);
  auto canvas = bg;
  std::normal_distribution<double> noise(0.0, 1.0);
  auto plant = [&](std::size_t) {
    const double n = 30.0 * p.plant_noise * noise(rng);
    return Color{55 + 0.5 * n, 150 + n, 50 + 0.4 * n};
  };
  // Weeds: isolated specks of plant colour between the rows.
  const auto weeds = static_cast<std::size_t>(p.clutter * static_cast<double>(h * w) / 256.0);
  for (std::size_t k = 0; k < weeds; ++k)
    paint_disc(canvas, h, w, uniform(rng, 0, static_cast<double>(h - 1)), uniform(rng, 0, static_cast<double>(w - 1)),
               uniform(rng, 0.5, 1.2), plant);
  const double radius = p.thickness / 2;
  for (std::size_t i = 0; i < line.size(); ++i)
    if (line[i]) paint_disc(canvas, h, w, static_cast<double>(i / w), static_cast<double>(i % w), radius, plant);
  for (std::size_t i = 0; i < gap.size(); ++i)
    if (gap[i])
      paint_disc(canvas, h, w, static_cast<double>(i / w), static_cast<double>(i % w), radius,
                 [&](std::size_t j) { return bg[j]; });

  Sample s;
  s.height = h;
  s.width = w;
  s.image = to_bytes(canvas);
  s.task_names = {"line", "gap"};
  s.masks = {std::move(line), std::move(gap)};
  s.meta = {{"generator", "crop"},
            {"seed", std::to_string(p.seed)},
            {"height", std::to_string(h)},
            {"width", std::to_string(w)},
            {"line_count", std::to_string(p.line_count)},
            {"line_spacing", fmt(p.line_spacing)},
            {"angle", fmt(p.angle)},
            {"thickness", fmt(p.thickness)},
            {"gap_count", std::to_string(p.gap_count)},
            {"gap_length", fmt(p.gap_length)},
            {"plant_noise", fmt(p.plant_noise)},
            {"background_texture", fmt(p.background_texture)},
            {"clutter", fmt(p.clutter)}};
  return s;
}

Sample gen_leaf_scene(const LeafSceneParams& p) {
  require_frame(p.height, p.width);
  if (p.axis_major <= 0 || p.axis_minor <= 0) throw ParameterError("leaf scene: axes must be positive");
  if (p.boundary_amplitude < 0 || p.boundary_amplitude >= 0.5)
    throw ParameterError("leaf scene: boundary amplitude must be in [0, 0.5)");
  const double reach = std::max(p.axis_major, p.axis_minor) * (1 + p.boundary_amplitude);
  if (p.center_row - reach < 0 || p.center_col - reach < 0 || p.center_row + reach > static_cast<double>(p.height - 1) ||
      p.center_col + reach > static_cast<double>(p.width - 1))
    throw ParameterError("leaf scene: leaf of reach " + fmt(reach) + " does not fit in the frame");

  Rng rng(p.seed);
  const std::size_t h = p.height, w = p.width;
  const double phase3 = uniform(rng, 0, 2 * std::numbers::pi), phase5 = uniform(rng, 0, 2 * std::numbers::pi);
  const double cr = std::cos(p.rotation), sr = std::sin(p.rotation);
  auto boundary = [&](double phi) {
    return 1 + p.boundary_amplitude * (0.6 * std::sin(3 * phi + phase3) + 0.4 * std::sin(5 * phi + phase5));
  };
  // Normalised radius and angle in the leaf frame.
  auto polar = [&](double y, double x) {
    const double ry = y - p.center_row, rx = x - p.center_col;
    const double u = (rx * cr + ry * sr) / p.axis_major, v = (-rx * sr + ry * cr) / p.axis_minor;
    return std::pair{std::hypot(u, v), std::atan2(v, u)};
  };
  auto to_image = [&](double rho, double phi) {
    const double u = rho * std::cos(phi) * p.axis_major, v = rho * std::sin(phi) * p.axis_minor;
    return std::pair{p.center_row + u * sr + v * cr, p.center_col + u * cr - v * sr};
  };

  std::vector<std::uint8_t> ideal(h * w, 0);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const auto [rho, phi] = polar(static_cast<double>(y), static_cast<double>(x));
      ideal[y * w + x] = rho <= boundary(phi) ? 1 : 0;
    }

  std::vector<std::pair<double, double>> holes, bites;
  for (std::size_t k = 0; k < p.hole_count; ++k) {
    const double phi = uniform(rng, 0, 2 * std::numbers::pi);
    holes.push_back(to_image(uniform(rng, 0.0, 0.55) * boundary(phi), phi));
  }
  for (std::size_t k = 0; k < p.bite_count; ++k) {
    const double phi = uniform(rng, 0, 2 * std::numbers::pi);
    bites.push_back(to_image(boundary(phi), phi));
  }
  std::vector<std::uint8_t> defoliation(h * w, 0), leaf(h * w, 0);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      if (!ideal[i]) continue;
      bool removed = false;
      for (const auto& [hy, hx] : holes)
        removed = removed || std::hypot(static_cast<double>(y) - hy, static_cast<double>(x) - hx) <= p.hole_radius;
      for (const auto& [by, bx] : bites)
        removed = removed || std::hypot(static_cast<double>(y) - by, static_cast<double>(x) - bx) <= p.bite_radius;
      defoliation[i] = removed ? 1 : 0;
      leaf[i] = removed ? 0 : 1;
    }

  auto bg = soil_background(rng, h, w, 0.5);
  const auto veins = value_noise(rng, h, w, 3);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto canvas = bg;
  const auto specks = static_cast<std::size_t>(p.clutter * static_cast<double>(h * w) / 200.0);
  for (std::size_t k = 0; k < specks; ++k) {
    const double shade = uniform(rng, -20, 20);
    paint_disc(canvas, h, w, uniform(rng, 0, static_cast<double>(h - 1)), uniform(rng, 0, static_cast<double>(w - 1)),
               uniform(rng, 0.5, 2.0), [&](std::size_t) { return Color{90 + shade, 110 + shade, 60 + shade}; });
  }
  for (std::size_t i = 0; i < leaf.size(); ++i) {
    if (!leaf[i]) continue;
    const double n = 6 * noise(rng) + 14 * veins[i];
    canvas[i] = {70 + 0.5 * n, 160 + n, 60 + 0.3 * n};
  }

  Sample s;
  s.height = h;
  s.width = w;
  s.image = to_bytes(canvas);
  s.task_names = {"leaf", "defoliation"};
  s.masks = {std::move(leaf), std::move(defoliation)};
  s.meta = {{"generator", "leaf"},
            {"seed", std::to_string(p.seed)},
            {"height", std::to_string(h)},
            {"width", std::to_string(w)},
            {"axis_major", fmt(p.axis_major)},
            {"axis_minor", fmt(p.axis_minor)},
            {"rotation", fmt(p.rotation)},
            {"center_row", fmt(p.center_row)},
            {"center_col", fmt(p.center_col)},
            {"boundary_amplitude", fmt(p.boundary_amplitude)},
            {"hole_count", std::to_string(p.hole_count)},
            {"hole_radius", fmt(p.hole_radius)},
            {"bite_count", std::to_string(p.bite_count)},
            {"bite_radius", fmt(p.bite_radius)},
            {"clutter", fmt(p.clutter)}};
  return s;
}

CropSceneParams random_crop_params(std::size_t size, std::uint64_t seed, std::size_t index) {
  Rng rng(seed * 0x9E3779B97F4A7C15ull + index);
  CropSceneParams p;
  p.height = p.width = size;
  p.line_spacing = uniform(rng, 10.0, 16.0);
  p.thickness = uniform(rng, 2.5, 4.0);
  p.angle = uniform(rng, 0.0, std::numbers::pi);
  p.line_count = static_cast<std::size_t>(std::ceil(std::sqrt(2.0) * static_cast<double>(size) / p.line_spacing)) + 2;
  const double scale = static_cast<double>(size) / 64.0;
  p.gap_count = static_cast<std::size_t>(std::lround(static_cast<double>(uniform_int(rng, 2, 4)) * scale * scale));
  p.gap_length = uniform(rng, 6.0, 12.0) * std::max(1.0, scale / 2);
  p.plant_noise = uniform(rng, 0.2, 0.5);
  p.background_texture = uniform(rng, 0.2, 0.6);
  p.clutter = uniform(rng, 0.2, 0.6);
  p.seed = rng();
  return p;
}

LeafSceneParams random_leaf_params(std::size_t size, std::uint64_t seed, std::size_t index) {
  Rng rng(seed * 0x9E3779B97F4A7C15ull + index + 0x5bd1e995ull);
  LeafSceneParams p;
  p.height = p.width = size;
  const double s = static_cast<double>(size);
  p.boundary_amplitude = uniform(rng, 0.03, 0.12);
  p.axis_major = uniform(rng, 0.26, 0.36) * s;
  p.axis_minor = uniform(rng, 0.55, 0.8) * p.axis_major;
  p.rotation = uniform(rng, 0, std::numbers::pi);
  const double reach = p.axis_major * (1 + p.boundary_amplitude);
  const double slack = std::max(0.0, (s - 1) / 2 - reach - 0.5);
  p.center_row = (s - 1) / 2 + uniform(rng, -slack, slack);
  p.center_col = (s - 1) / 2 + uniform(rng, -slack, slack);
  p.hole_count = uniform_int(rng, 0, 2);
  p.hole_radius = uniform(rng, 0.04, 0.08) * s;
  p.bite_count = uniform_int(rng, 1, 3);
  p.bite_radius = uniform(rng, 0.08, 0.14) * s;
  p.clutter = uniform(rng, 0.2, 0.6);
  p.seed = rng();
  return p;
}

std::vector<std::uint8_t> dilate_mask(std::span<const std::uint8_t> mask, std::size_t height, std::size_t width,
                                      std::size_t element) {
  if (mask.size() != height * width) throw DimensionError("dilate_mask: mask size mismatch");
  if (element == 0) throw ArgumentError("dilate_mask: element size must be positive");
  const auto before = static_cast<std::ptrdiff_t>((element - 1) / 2);
  const auto after = static_cast<std::ptrdiff_t>(element) - 1 - before;
  const auto h = static_cast<std::ptrdiff_t>(height), w = static_cast<std::ptrdiff_t>(width);
  // Separable: a pixel is on if some set pixel q satisfies p - q in [-before, after]^2.
  std::vector<std::uint8_t> rows(mask.size(), 0), out(mask.size(), 0);
  for (std::ptrdiff_t y = 0; y < h; ++y)
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      std::uint8_t on = 0;
      for (auto q = std::max<std::ptrdiff_t>(0, x - after); q <= std::min(w - 1, x + before) && !on; ++q)
        on = mask[static_cast<std::size_t>(y * w + q)] ? 1 : 0;
      rows[static_cast<std::size_t>(y * w + x)] = on;
    }
  for (std::ptrdiff_t y = 0; y < h; ++y)
    for (std::ptrdiff_t x = 0; x < w; ++x) {
      std::uint8_t on = 0;
      for (auto q = std::max<std::ptrdiff_t>(0, y - after); q <= std::min(h - 1, y + before) && !on; ++q)
        on = rows[static_cast<std::size_t>(q * w + x)];
      out[static_cast<std::size_t>(y * w + x)] = on;
    }
  return out;
}

void write_sample(const std::filesystem::path& dir, const std::string& stem, const Sample& sample) {
  std::filesystem::create_directories(dir);
  write_ppm(dir / (stem + ".ppm"), RgbImage{sample.height, sample.width, sample.image});
  for (std::size_t k = 0; k < sample.masks.size(); ++k) {
    GrayImage g{sample.height, sample.width, sample.masks[k]};
    for (auto& v : g.pixels) v = v ? 255 : 0;
    write_pgm(dir / (stem + ".task" + std::to_string(k + 1) + ".pgm"), g);
  }
  std::ofstream meta(dir / (stem + ".meta"), std::ios::trunc);
  if (!meta) throw std::runtime_error("cannot write " + (dir / (stem + ".meta")).string());
  std::string tasks;
  for (const auto& t : sample.task_names) tasks += (tasks.empty() ? "" : ",") + t;
  meta << "tasks=" << tasks << '\n';
  for (const auto& [k, v] : sample.meta) meta << k << '=' << v << '\n';
}

Sample read_sample(const std::filesystem::path& dir, const std::string& stem) {
  const auto meta_path = dir / (stem + ".meta");
  std::ifstream meta(meta_path);
  if (!meta) throw FormatError(meta_path.string(), 0, "missing meta file");
  Sample s;
  std::string line;
  std::size_t offset = 0;
  bool have_tasks = false;
  while (std::getline(meta, line)) {
    const std::size_t line_start = offset;
    offset += line.size() + 1;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError(meta_path.string(), line_start, "expected key=value");
    const auto key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "tasks") {
      have_tasks = true;
      std::stringstream ss(value);
      std::string t;
      while (std::getline(ss, t, ','))
        if (!t.empty()) s.task_names.push_back(t);
    } else {
      s.meta.emplace_back(key, value);
    }
  }
  if (!have_tasks || s.task_names.empty()) throw FormatError(meta_path.string(), offset, "no tasks declared");

  const auto img = read_ppm(dir / (stem + ".ppm"));
  s.height = img.height;
  s.width = img.width;
  s.image = img.pixels;
  for (std::size_t k = 0; k < s.task_names.size(); ++k) {
    const auto path = dir / (stem + ".task" + std::to_string(k + 1) + ".pgm");
    if (!std::filesystem::exists(path))
      throw FormatError(path.string(), 0, "missing mask file for task " + s.task_names[k]);
    auto g = read_pgm(path);
    if (g.height != s.height || g.width != s.width)
      throw FormatError(path.string(), 0, "mask extents differ from the image");
    // Raster starts after the fixed-size header this module writes; report
    // offsets relative to the file start when the header is canonical.
    const std::size_t header = ("P5\n" + std::to_string(g.width) + " " + std::to_string(g.height) + "\n255\n").size();
    for (std::size_t i = 0; i < g.pixels.size(); ++i) {
      if (g.pixels[i] != 0 && g.pixels[i] != 255)
        throw FormatError(path.string(), header + i,
                          "mask value " + std::to_string(g.pixels[i]) + " is not 0 or 255");
      g.pixels[i] = g.pixels[i] ? 1 : 0;
    }
    s.masks.push_back(std::move(g.pixels));
  }
  return s;
}

Dataset generate_dataset(const std::string& kind, std::size_t count, std::size_t size, std::uint64_t seed) {
  Dataset ds;
  ds.kind = kind;
  if (kind == "crop") {
    ds.task_names = {"line", "gap"};
    ds.thin = {true, true};
  } else if (kind == "leaf") {
    ds.task_names = {"leaf", "defoliation"};
    ds.thin = {false, false};
  } else {
    throw ArgumentError("unknown dataset kind '" + kind + "' (expected crop or leaf)");
  }
  // Scene validation would otherwise throw inside the parallel loop.
  if (size == 0 || size % 32 != 0)
    throw ParameterError("scene extents " + std::to_string(size) + "x" + std::to_string(size) +
                         " must be positive multiples of 32");
  ds.samples.resize(count);
  ds.stems.resize(count);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(count); ++si) {
    const auto i = static_cast<std::size_t>(si);
    ds.samples[i] = kind == "crop" ? gen_crop_scene(random_crop_params(size, seed, i))
                                   : gen_leaf_scene(random_leaf_params(size, seed, i));
    char stem[32];
    std::snprintf(stem, sizeof stem, "s%04zu", i);
    ds.stems[i] = stem;
  }
  return ds;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) write_sample(dir, dataset.stems[i], dataset.samples[i]);
  std::ofstream manifest(dir / "manifest.txt", std::ios::trunc);
  if (!manifest) throw std::runtime_error("cannot write manifest in " + dir.string());
  manifest << "# mtlseg dataset\n";
  manifest << "kind " << dataset.kind << '\n';
  for (std::size_t k = 0; k < dataset.task_names.size(); ++k)
    manifest << "task " << dataset.task_names[k] << (dataset.thin[k] ? " thin" : "") << '\n';
  for (const auto& stem : dataset.stems) manifest << stem << '\n';
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.txt";
  std::ifstream manifest(path);
  if (!manifest) throw FormatError(path.string(), 0, "missing manifest");
  Dataset ds;
  std::string line;
  std::size_t offset = 0;
  while (std::getline(manifest, line)) {
    const std::size_t line_start = offset;
    offset += line.size() + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string head;
    ss >> head;
    if (head == "kind") {
      ss >> ds.kind;
    } else if (head == "task") {
      std::string name, flag;
      ss >> name >> flag;
      if (name.empty()) throw FormatError(path.string(), line_start, "task line without a name");
      ds.task_names.push_back(name);
      ds.thin.push_back(flag == "thin");
    } else {
      ds.stems.push_back(head);
    }
  }
  if (ds.task_names.empty()) throw FormatError(path.string(), offset, "manifest declares no tasks");
  if (ds.stems.empty()) throw FormatError(path.string(), offset, "manifest lists no samples");
  for (const auto& stem : ds.stems) {
    auto s = read_sample(dir, stem);
    if (s.task_names != ds.task_names)
      throw FormatError((dir / (stem + ".meta")).string(), 0, "sample tasks differ from the manifest");
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace mtlseg
