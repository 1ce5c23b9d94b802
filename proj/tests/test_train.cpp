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
#include <fstream>
#include <iterator>
#include <sstream>

#include "mtlseg/checkpoint.hpp"
#include "mtlseg/errors.hpp"
#include "mtlseg/gradcheck.hpp"
#include "mtlseg/optim.hpp"
#include "mtlseg/train.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace mtlseg;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TrainConfig tiny_config(const std::filesystem::path& out) {
  TrainConfig c;
  c.iterations = 3;
  c.seed = 11;
  c.log_interval = 1;
  c.out_dir = out.string();
  return c;
}

}  // namespace

TEST_SUITE("train") {
  TEST_CASE("config parsing") {
    const auto c = parse_train_config(
        "# desk run\n"
        "iterations = 40\n"
        "base_lr=0.001   # faster\n"
        "\n"
        "cross_attention = false\n"
        "encoder = t0\n"
        "data = crops\n");
    CHECK(c.iterations == 40);
    CHECK(c.base_lr == 0.001);
    CHECK_FALSE(c.cross_attention);
    CHECK(c.data == "crops");
    CHECK(c.batch_size == 2);
    CHECK(c.weight_decay == 0.01);

    try {
      parse_train_config("iterations = 4\nlearning_rate = 1\n", "run.cfg");
      FAIL("unknown key accepted");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("run.cfg:2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_train_config("iterations = many\n"), ConfigError);
    CHECK_THROWS_AS(parse_train_config("iterations\n"), ConfigError);
    CHECK_THROWS_AS(parse_train_config("iterations = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_train_config("base_lr = -1\n"), ConfigError);
    CHECK_THROWS_AS(parse_train_config("encoder = b9\n"), ConfigError);
  }

  TEST_CASE("config files resolve paths next to themselves") {
    const test::TempDir dir;
    std::ofstream(dir.path() / "run.cfg") << "data = data\nout_dir = out\niterations = 5\n";
    const auto c = load_train_config(dir.path() / "run.cfg");
    CHECK(std::filesystem::path(c.data) == dir.path() / "data");
    CHECK(std::filesystem::path(c.out_dir) == dir.path() / "out");
    CHECK_THROWS_AS(load_train_config(dir.path() / "missing.cfg"), ConfigError);
  }

  TEST_CASE("loss hand cases") {
    using D = Tensor<double>;
    const std::vector<std::uint8_t> a{0, 1, 1, 0}, b{1, 1, 0, 0};
    const std::vector<std::span<const std::uint8_t>> labels{a, b};
    const auto uniform = mtl_loss<double>({D::zeros({2, 2, 2}), D::zeros({2, 2, 2})}, labels);
    CHECK(uniform.item() == doctest::Approx(2 * std::log(2.0)).epsilon(1e-14));
    auto confident = [](const std::vector<std::uint8_t>& m) {
      std::vector<double> v;
      for (auto x : m) {
        v.push_back(x ? -30.0 : 30.0);
        v.push_back(x ? 30.0 : -30.0);
      }
      return D({2, 2, 2}, v);
    };
    CHECK(mtl_loss<double>({confident(a), confident(b)}, labels).item() < 1e-20);
    const std::vector<std::uint8_t> bad{0, 2, 0, 0};
    CHECK_THROWS_AS(mtl_loss<double>({D::zeros({2, 2, 2}), D::zeros({2, 2, 2})}, {a, bad}), ArgumentError);
    CHECK_THROWS_AS(mtl_loss<double>({D::zeros({2, 2, 2})}, labels), ArgumentError);
  }

  TEST_CASE("loss gradient through the heads") {
    using D = Tensor<double>;
    ModelConfig cfg;
    MultiTaskSegmenter<double> model(cfg, 21);
    std::mt19937_64 rng(21);
    const std::vector<D> branches{D({4, 4, 16}, oracle::random_vector(rng, 256), true),
                                  D({4, 4, 16}, oracle::random_vector(rng, 256), true)};
    const auto l1 = oracle::random_mask(rng, 256, 0.3), l2 = oracle::random_mask(rng, 256, 0.1);
    std::vector<D> params = branches;
    for (const auto& h : model.decoder().head_layers()) {
      params.push_back(h.weight);
      params.push_back(h.bias);
    }
    GradCheckOptions opts;
    opts.eps = 1e-5;
    const auto report = grad_check([&] { return mtl_loss(model.decoder().predict_heads(branches), {l1, l2}); }, params, opts);
    CAPTURE(report.worst);
    CHECK(report.max_rel_error <= 1e-4);
  }

  TEST_CASE("training is deterministic and follows the schedule") {
    const auto ds = generate_dataset("crop", 4, 32, 3);
    const test::TempDir a, b;
    std::ostringstream stream;
    const auto ra = train(tiny_config(a.path()), ds, &stream);
    const auto rb = train(tiny_config(b.path()), ds);
    CHECK(slurp(a.path() / "last.ckpt") == slurp(b.path() / "last.ckpt"));
    CHECK_FALSE(slurp(a.path() / "last.ckpt").empty());
    REQUIRE(ra.log.records.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& r = ra.log.records[i];
      CHECK(r.iteration == i);
      CHECK(r.lr == poly_lr(i, 3, 6e-5, 1.0));
      CHECK(RunLog::format(r, ra.log.task_names, false) == RunLog::format(rb.log.records[i], rb.log.task_names, false));
      CHECK(r.task_losses.size() == 2);
      CHECK(r.loss == doctest::Approx(r.task_losses[0] + r.task_losses[1]));
    }
    CHECK(ra.log.records[0].lr == 6e-5);
    CHECK(ra.log.initial_loss == rb.log.initial_loss);
    CHECK(ra.log.final_loss == rb.log.final_loss);
    CHECK(stream.str().find("initial_loss=") != std::string::npos);
    CHECK(stream.str().find("iter=0 lr=") != std::string::npos);
    CHECK(std::filesystem::exists(a.path() / "run.log"));

    // A different seed changes the weights.
    auto other = tiny_config(b.path());
    other.seed = 12;
    train(other, ds);
    CHECK(slurp(a.path() / "last.ckpt") != slurp(b.path() / "last.ckpt"));
  }

  TEST_CASE("checkpoint interval writes intermediate files") {
    const auto ds = generate_dataset("leaf", 2, 32, 4);
    const test::TempDir dir;
    auto cfg = tiny_config(dir.path());
    cfg.iterations = 4;
    cfg.checkpoint_interval = 2;
    cfg.batch_size = 1;
    const auto r = train(cfg, ds);
    CHECK(std::filesystem::exists(dir.path() / "ckpt_2.ckpt"));
    CHECK(std::filesystem::exists(dir.path() / "ckpt_4.ckpt"));
    const auto loaded = load_model(dir.path() / "last.ckpt");
    CHECK(loaded.config() == r.model->config());
    for (std::size_t i = 0; i < loaded.params().entries().size(); ++i) {
      const auto& x = loaded.params().entries()[i].second.data();
      const auto& y = r.model->params().entries()[i].second.data();
      CHECK(std::equal(x.begin(), x.end(), y.begin()));
    }
  }

  TEST_CASE("log lines are key=value") {
    LogRecord r{.iteration = 7, .lr = 2.5e-5, .loss = 0.75, .task_losses = {0.5, 0.25}, .seconds = 1.5};
    CHECK(RunLog::format(r, {"line", "gap"}, false) == "iter=7 lr=2.5e-05 loss=0.75 loss.line=0.5 loss.gap=0.25");
    CHECK(RunLog::format(r, {"line", "gap"}).find("time=1.5") != std::string::npos);
  }
}
