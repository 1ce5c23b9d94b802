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

#include "mtlseg/image_io.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

#include "mtlseg/errors.hpp"

namespace mtlseg {

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError(path.string(), 0, "cannot open file");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void spit(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("short write to " + path.string());
}

// Netpbm header: magic, then width, height and maxval separated by whitespace
// and '#' comments, then exactly one whitespace byte before the raster.
struct Header {
  std::size_t width = 0, height = 0, maxval = 0, data_offset = 0;
};

Header parse_header(const std::string& bytes, const std::string& file, std::string_view magic) {
  if (bytes.size() < 2 || bytes.compare(0, 2, magic) != 0)
    throw FormatError(file, 0, "expected magic " + std::string(magic));
  std::size_t pos = 2;
  auto skip = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&](const char* what) {
    skip();
    const std::size_t start = pos;
    std::size_t v = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      v = v * 10 + static_cast<std::size_t>(bytes[pos] - '0');
      if (v > 1'000'000) throw FormatError(file, start, std::string(what) + " too large");
      ++pos;
    }
    if (pos == start) throw FormatError(file, start, std::string("expected ") + what);
    return v;
  };
  Header h;
  h.width = number("width");
  h.height = number("height");
  h.maxval = number("maxval");
  if (h.width == 0 || h.height == 0) throw FormatError(file, pos, "zero image extent");
  if (h.maxval != 255) throw FormatError(file, pos, "maxval must be 255");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    throw FormatError(file, pos, "missing whitespace before raster");
  h.data_offset = pos + 1;
  return h;
}

std::string header(std::string_view magic, std::size_t w, std::size_t h) {
  return std::string(magic) + "\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
}

}  // namespace

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
  if (image.pixels.size() != image.height * image.width * 3) throw DimensionError("write_ppm: pixel count mismatch");
  spit(path, header("P6", image.width, image.height) + std::string(image.pixels.begin(), image.pixels.end()));
}

RgbImage read_ppm(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  const auto h = parse_header(bytes, path.string(), "P6");
  const std::size_t n = h.width * h.height * 3;
  if (bytes.size() - h.data_offset < n)
    throw FormatError(path.string(), bytes.size(), "truncated raster, expected " + std::to_string(n) + " bytes");
  RgbImage img{h.height, h.width, {}};
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset),
                    bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset + n));
  return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  if (image.pixels.size() != image.height * image.width) throw DimensionError("write_pgm: pixel count mismatch");
  spit(path, header("P5", image.width, image.height) + std::string(image.pixels.begin(), image.pixels.end()));
}

GrayImage read_pgm(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  const auto h = parse_header(bytes, path.string(), "P5");
  const std::size_t n = h.width * h.height;
  if (bytes.size() - h.data_offset < n)
    throw FormatError(path.string(), bytes.size(), "truncated raster, expected " + std::to_string(n) + " bytes");
  GrayImage img{h.height, h.width, {}};
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset),
                    bytes.begin() + static_cast<std::ptrdiff_t>(h.data_offset + n));
  return img;
}

}  // namespace mtlseg
