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

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mtlseg/data.hpp"
#include "mtlseg/errors.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace mtlseg;

namespace {

std::size_t count(const std::vector<std::uint8_t>& m) {
  std::size_t n = 0;
  for (auto v : m) n += v;
  return n;
}

}  // namespace

TEST_SUITE("data") {
  TEST_CASE("crop scenes are pure functions of their parameters") {
    CropSceneParams p;
    p.seed = 42;
    const auto a = gen_crop_scene(p), b = gen_crop_scene(p);
    CHECK(a == b);
    CHECK(a.task_names == std::vector<std::string>{"line", "gap"});
    CHECK(a.meta_value("seed") == "42");
    p.seed = 43;
    CHECK_FALSE(gen_crop_scene(p) == a);
  }

  TEST_CASE("crop geometry validation") {
    CropSceneParams p;
    p.line_spacing = 3.0;
    p.thickness = 3.0;
    CHECK_THROWS_AS(gen_crop_scene(p), ParameterError);
    p = {};
    p.height = 48;
    CHECK_THROWS_AS(gen_crop_scene(p), ParameterError);
    CHECK_THROWS_AS(generate_dataset("crop", 3, 48, 1), ParameterError);
  }

  TEST_CASE("without gaps the gap mask is empty and lines remain") {
    CropSceneParams p;
    p.gap_count = 0;
    const auto s = gen_crop_scene(p);
    CHECK(count(s.masks[1]) == 0);
    CHECK(count(s.masks[0]) > 0);
  }

  TEST_CASE("gap pixels sit on a line trajectory") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      CAPTURE(seed);
      const auto p = random_crop_params(64, 11, seed);
      const auto s = gen_crop_scene(p);
      const auto& line = s.masks[0];
      const auto& gap = s.masks[1];
      const double nx = -std::sin(p.angle), ny = std::cos(p.angle);
      const auto offset = [&](std::size_t i) { return nx * static_cast<double>(i % 64) + ny * static_cast<double>(i / 64); };
      for (std::size_t i = 0; i < gap.size(); ++i) {
        if (!gap[i]) continue;
        CHECK_FALSE(line[i]);
        // The host row continues on at least one side of the gap, within one
        // pixel of the gap's perpendicular offset.
        std::size_t host = 0;
        for (std::size_t j = 0; j < line.size(); ++j)
          if (line[j] && std::abs(offset(j) - offset(i)) <= 1.0) ++host;
        CHECK(host >= 3);
      }
    }
  }

  TEST_CASE("leaf masks partition the ideal shape") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      CAPTURE(seed);
      auto p = random_leaf_params(64, 5, seed);
      const auto s = gen_leaf_scene(p);
      auto intact = p;
      intact.hole_count = 0;
      intact.bite_count = 0;
      const auto ideal = gen_leaf_scene(intact);
      CHECK(count(ideal.masks[1]) == 0);
      for (std::size_t i = 0; i < s.masks[0].size(); ++i) {
        CHECK_FALSE((s.masks[0][i] && s.masks[1][i]));
        CHECK((s.masks[0][i] || s.masks[1][i]) == static_cast<bool>(ideal.masks[0][i]));
      }
    }
    LeafSceneParams off;
    off.center_row = 5;
    CHECK_THROWS_AS(gen_leaf_scene(off), ParameterError);
  }

  TEST_CASE("dilation matches the definition") {
    std::vector<std::uint8_t> single(32 * 32, 0);
    single[10 * 32 + 10] = 1;
    const auto d = dilate_mask(single, 32, 32);
    for (std::size_t y = 0; y < 32; ++y)
      for (std::size_t x = 0; x < 32; ++x) CHECK(d[y * 32 + x] == (y >= 8 && y <= 13 && x >= 8 && x <= 13 ? 1 : 0));
    CHECK(count(dilate_mask(std::vector<std::uint8_t>(64, 0), 8, 8)) == 0);

    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t h = 5 + rng() % 30, w = 5 + rng() % 30, e = 1 + rng() % 8;
      const auto m = oracle::random_mask(rng, h * w, 0.05);
      CHECK(dilate_mask(m, h, w, e) == oracle::dilate(m, h, w, e));
    }
  }

  TEST_CASE("dilation is monotone") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      auto a = oracle::random_mask(rng, 40 * 40, 0.03);
      auto b = a;
      for (auto& v : b) v |= (rng() % 20 == 0);
      const auto da = dilate_mask(a, 40, 40), db = dilate_mask(b, 40, 40);
      for (std::size_t i = 0; i < da.size(); ++i) CHECK((!da[i] || db[i]));
    }
  }

  TEST_CASE("thin gap labels are rare and dilation raises their share") {
    const auto ds = generate_dataset("crop", 16, 64, 7);
    std::size_t raw = 0, dilated = 0, total = 0;
    for (const auto& s : ds.samples) {
      raw += count(s.masks[1]);
      dilated += count(dilate_mask(s.masks[1], s.height, s.width));
      total += s.height * s.width;
    }
    CHECK(static_cast<double>(raw) / static_cast<double>(total) < 0.02);
    CHECK(dilated > raw);
    CHECK(ds.thin == std::vector<bool>{true, true});
  }

  TEST_CASE("samples round-trip through files") {
    const test::TempDir dir;
    const auto ds = generate_dataset("leaf", 3, 64, 9);
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      write_sample(dir.path(), ds.stems[i], ds.samples[i]);
      CHECK(read_sample(dir.path(), ds.stems[i]) == ds.samples[i]);
    }
  }

  TEST_CASE("datasets round-trip with their manifest") {
    const test::TempDir dir;
    const auto ds = generate_dataset("crop", 4, 32, 1);
    write_dataset(dir.path(), ds);
    const auto back = load_dataset(dir.path());
    CHECK(back.kind == "crop");
    CHECK(back.task_names == ds.task_names);
    CHECK(back.thin == ds.thin);
    CHECK(back.stems == ds.stems);
    CHECK(back.samples == ds.samples);
    CHECK(generate_dataset("crop", 4, 32, 1).samples == ds.samples);
    CHECK_THROWS_AS(generate_dataset("forest", 1, 32, 1), ArgumentError);
  }

  TEST_CASE("malformed files are rejected") {
    const test::TempDir dir;
    const auto s = gen_crop_scene(CropSceneParams{});
    write_sample(dir.path(), "a", s);

    SUBCASE("non-binary mask value") {
      const auto path = dir.path() / "a.task2.pgm";
      std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
      f.seekp(-1, std::ios::end);
      f.put(static_cast<char>(7));
      f.close();
      try {
        read_sample(dir.path(), "a");
        FAIL("accepted a mask value of 7");
      } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find(" @") != std::string::npos);
      }
    }
    SUBCASE("missing mask") {
      std::filesystem::remove(dir.path() / "a.task1.pgm");
      CHECK_THROWS_AS(read_sample(dir.path(), "a"), FormatError);
    }
    SUBCASE("truncated image") {
      const auto path = dir.path() / "a.ppm";
      std::filesystem::resize_file(path, std::filesystem::file_size(path) - 10);
      CHECK_THROWS_AS(read_sample(dir.path(), "a"), FormatError);
    }
    SUBCASE("bad image header") {
      std::ofstream(dir.path() / "a.ppm", std::ios::binary) << "P3\n64 64\n255\n";
      CHECK_THROWS_AS(read_sample(dir.path(), "a"), FormatError);
    }
  }
}
