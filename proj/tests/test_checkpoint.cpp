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

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "mtlseg/checkpoint.hpp"
#include "mtlseg/errors.hpp"
#include "temp_dir.hpp"

using namespace mtlseg;

TEST_SUITE("checkpoint") {
  TEST_CASE("entries round-trip exactly") {
    const test::TempDir dir;
    const std::vector<CheckpointEntry> entries{{"a", {2, 3}, {1, 2, 3, 4, 5, 6}},
                                               {"b.weight", {1}, {-0.0f}},
                                               {"c", {2, 1, 2}, {1e-30f, 3.5f, -7.25f, 1e30f}}};
    write_checkpoint(dir.path() / "x.ckpt", entries);
    const auto back = read_checkpoint(dir.path() / "x.ckpt");
    REQUIRE(back.size() == entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
      CHECK(back[i].name == entries[i].name);
      CHECK(back[i].shape == entries[i].shape);
      CHECK(std::memcmp(back[i].values.data(), entries[i].values.data(), entries[i].values.size() * sizeof(float)) == 0);
    }
  }

  TEST_CASE("malformed files report the failing offset") {
    const test::TempDir dir;
    const auto path = dir.path() / "x.ckpt";
    write_checkpoint(path, {{"weights", {4}, {1, 2, 3, 4}}});
    std::ifstream in(path, std::ios::binary);
    const std::string bytes{std::istreambuf_iterator<char>(in), {}};
    in.close();

    for (std::size_t cut : {std::size_t{3}, std::size_t{10}, std::size_t{20}, bytes.size() - 1}) {
      CAPTURE(cut);
      std::ofstream(path, std::ios::binary | std::ios::trunc) << bytes.substr(0, cut);
      try {
        read_checkpoint(path);
        FAIL("truncated checkpoint accepted");
      } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find(" @") != std::string::npos);
      }
    }
    std::string wrong = bytes;
    wrong[0] = 'X';
    std::ofstream(path, std::ios::binary | std::ios::trunc) << wrong;
    CHECK_THROWS_AS(read_checkpoint(path), FormatError);
    CHECK_THROWS_AS(read_checkpoint(dir.path() / "absent.ckpt"), FormatError);
  }

  TEST_CASE("models rebuild from their own checkpoint") {
    const test::TempDir dir;
    ModelConfig cfg;
    cfg.decoder.channels = 8;
    cfg.decoder.heads = 2;
    cfg.decoder.cross_reduction = 2;
    MultiTaskSegmenter<float> model(cfg, 31);
    save_model(model, dir.path() / "m.ckpt");
    const auto loaded = load_model(dir.path() / "m.ckpt");
    CHECK(loaded.config() == cfg);
    std::vector<std::uint8_t> rgb(32 * 32 * 3, 90);
    NoGradGuard guard;
    const auto image = image_to_tensor<float>(rgb, 32, 32);
    const auto a = model.forward(image), b = loaded.forward(image);
    for (std::size_t t = 0; t < 2; ++t)
      CHECK(std::equal(a[t].data().begin(), a[t].data().end(), b[t].data().begin()));
  }

  TEST_CASE("parameter loading checks names and shapes") {
    MultiTaskSegmenter<float> model(ModelConfig{}, 32);
    auto entries = model_entries(model);
    auto missing = entries;
    missing.erase(missing.begin() + 3);
    CHECK_THROWS_AS(load_parameters(model.params(), missing), FormatError);
    auto reshaped = entries;
    for (auto& e : reshaped)
      if (e.name == "decoder.head1.bias") {
        e.shape = {1, 2};
      }
    CHECK_THROWS_AS(load_parameters(model.params(), reshaped), FormatError);
    CHECK_NOTHROW(load_parameters(model.params(), entries));
  }
}
