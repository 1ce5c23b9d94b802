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
#include <limits>

#include "mtlseg/errors.hpp"
#include "mtlseg/ops.hpp"
#include "oracles.hpp"

using namespace mtlseg;
using T = Tensor<double>;

namespace {

void check_values(const T& t, std::initializer_list<double> expected, double eps = 1e-12) {
  REQUIRE(t.numel() == expected.size());
  std::size_t i = 0;
  for (double e : expected) CHECK(t.data()[i++] == doctest::Approx(e).epsilon(eps));
}

}  // namespace

TEST_SUITE("tensor") {
  TEST_CASE("construction validates the value count") {
    CHECK_THROWS_AS(T({2, 3}, std::vector<double>(5)), DimensionError);
    const T t({2, 3}, {1, 2, 3, 4, 5, 6});
    CHECK(t.rows() == 2);
    CHECK(t.cols() == 3);
    CHECK(t.is_leaf());
  }

  TEST_CASE("non-finite results are rejected") {
    const T big({1}, {1e308});
    CHECK_THROWS_AS(ops::scale(big, 10.0), NumericError);
    CHECK_THROWS_AS(T({1}, {std::numeric_limits<double>::quiet_NaN()}), NumericError);
  }

  TEST_CASE("backward accumulates through shared subexpressions") {
    const T x({2}, {1.5, -2.0}, true);
    const auto y = ops::sum(ops::add(ops::mul(x, x), x));  // d/dx = 2x + 1
    y.backward();
    check_values(T({2}, std::vector<double>(x.grad().begin(), x.grad().end())), {4.0, -3.0});
  }

  TEST_CASE("no-grad guard builds graph-free results") {
    const T x({2}, {1, 2}, true);
    NoGradGuard guard;
    const auto y = ops::scale(x, 2.0);
    CHECK_FALSE(y.requires_grad());
    CHECK(y.is_leaf());
  }
}

TEST_SUITE("ops") {
  TEST_CASE("matmul hand cases and shape errors") {
    const T eye({2, 2}, {1, 0, 0, 1});
    check_values(ops::matmul(eye, eye), {1, 0, 0, 1});
    check_values(ops::matmul(T({2, 2}, {1, 2, 3, 4}), T({2, 1}, {1, 1})), {3, 7});
    CHECK_THROWS_AS(ops::matmul(T({2, 3}, std::vector<double>(6)), T({2, 2}, std::vector<double>(4))), DimensionError);
  }

  TEST_CASE("softmax symmetry and stabilisation") {
    check_values(ops::softmax_lastdim(T({3}, {0, 0, 0})), {1.0 / 3, 1.0 / 3, 1.0 / 3});
    const auto s = ops::softmax_lastdim(T({2}, {1000, 0}));
    CHECK(s.data()[0] == doctest::Approx(1.0));
    CHECK(s.data()[1] >= 0.0);
    CHECK(s.data()[1] < 1e-300);
    std::mt19937_64 rng(3);
    const auto r = ops::softmax_lastdim(T({4, 5}, oracle::random_vector(rng, 20, -5, 5)));
    for (std::size_t i = 0; i < 4; ++i) {
      double total = 0;
      for (std::size_t j = 0; j < 5; ++j) {
        CHECK(r.data()[i * 5 + j] >= 0.0);
        total += r.data()[i * 5 + j];
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("conv2d identity kernel and patch-embed extents") {
    std::mt19937_64 rng(4);
    const T x({4, 4, 1}, oracle::random_vector(rng, 16));
    std::vector<double> w(9, 0.0);
    w[4] = 1.0;
    const auto y = ops::conv2d(x, T({3, 3, 1, 1}, w), T{}, {3, 1, 1, 1});
    CHECK(y.shape() == Shape{4, 4, 1});
    for (std::size_t i = 0; i < 16; ++i) CHECK(y.data()[i] == x.data()[i]);
    CHECK(ops::conv_output_extent(8, 7, 4, 3) == 2);
    const auto z = ops::conv2d(T::zeros({8, 8, 3}), T::zeros({7, 7, 3, 5}), T{}, {7, 4, 3, 1});
    CHECK(z.shape() == Shape{2, 2, 5});
    CHECK_THROWS_AS(ops::conv_output_extent(2, 7, 1, 0), DimensionError);
    CHECK_THROWS_AS(ops::conv2d(T::zeros({2, 2, 1}), T::zeros({7, 7, 1, 1}), T{}, {7, 1, 0, 1}), DimensionError);
  }

  TEST_CASE("gelu fixed point, asymptotics and closed form at 1") {
    const auto g = ops::gelu(T({4}, {0.0, 1.0, 30.0, -30.0}));
    const double c = std::sqrt(2.0 / std::acos(-1.0));
    const double at_one = 0.5 * (1 + std::tanh(c * (1 + 0.044715)));
    CHECK(g.data()[0] == 0.0);
    CHECK(g.data()[1] == doctest::Approx(at_one).epsilon(1e-14));
    CHECK(g.data()[1] == doctest::Approx(0.8412).epsilon(1e-4));
    CHECK(g.data()[2] == doctest::Approx(30.0));
    CHECK(std::abs(g.data()[3]) < 1e-12);
  }

  TEST_CASE("layer_norm hand cases") {
    const T gain({2}, {1, 1}), bias({2}, {0, 0});
    const double s = 1.0 / std::sqrt(1.0 + 1e-5);
    check_values(ops::layer_norm(T({2}, {1, 3}), gain, bias), {-s, s});
    const auto z = ops::layer_norm(T({1, 3}, {5, 5, 5}), T({3}, {1, 1, 1}), T({3}, {0, 0, 0}));
    for (double v : z.data()) CHECK(v == 0.0);
  }

  TEST_CASE("bilinear upsample hand case, identity and constants") {
    const auto up = ops::bilinear_upsample(T({2, 2, 1}, {0, 1, 2, 3}), 2);
    CHECK(up.shape() == Shape{4, 4, 1});
    check_values(up, {0, 0.25, 0.75, 1, 0.5, 0.75, 1.25, 1.5, 1.5, 1.75, 2.25, 2.5, 2, 2.25, 2.75, 3});
    std::mt19937_64 rng(5);
    const T x({3, 2, 2}, oracle::random_vector(rng, 12));
    const auto same = ops::bilinear_upsample(x, 1);
    for (std::size_t i = 0; i < 12; ++i) CHECK(same.data()[i] == x.data()[i]);
    const auto flat = ops::bilinear_upsample(T::full({2, 3, 2}, 0.7), 8);
    for (double v : flat.data()) CHECK(v == doctest::Approx(0.7).epsilon(1e-15));
  }

  TEST_CASE("space_to_depth ordering and tiling errors") {
    std::vector<double> v(4 * 4 * 2);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    const auto s = ops::space_to_depth(T({4, 4, 2}, v), 2);
    CHECK(s.shape() == Shape{2, 2, 8});
    // Block (0, 1): rows 0-1, cols 2-3; entries ordered (dy, dx, channel).
    check_values(ops::slice_lastdim(ops::reshape(s, {4, 8}), 0, 8), {0, 1, 2, 3, 8, 9, 10, 11, 4, 5, 6, 7, 12, 13, 14, 15,
                                                                   16, 17, 18, 19, 24, 25, 26, 27, 20, 21, 22, 23, 28, 29,
                                                                   30, 31});
    CHECK_THROWS_AS(ops::space_to_depth(T::zeros({6, 4, 1}), 4), ConfigError);
  }

  TEST_CASE("concat and slice round trip") {
    std::mt19937_64 rng(6);
    const T a({3, 2}, oracle::random_vector(rng, 6)), b({3, 3}, oracle::random_vector(rng, 9));
    const auto c = ops::concat_lastdim<double>({a, b});
    CHECK(c.shape() == Shape{3, 5});
    const auto back = ops::slice_lastdim(c, 2, 3);
    for (std::size_t i = 0; i < 9; ++i) CHECK(back.data()[i] == b.data()[i]);
  }

  TEST_CASE("two-class cross entropy") {
    const std::vector<std::uint8_t> labels{0, 1, 1};
    const auto uniform = ops::cross_entropy_2class(T::zeros({3, 2}), labels);
    CHECK(uniform.item() == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    const auto confident = ops::cross_entropy_2class(T({3, 2}, {40, -40, -40, 40, -40, 40}), labels);
    CHECK(confident.item() < 1e-30);
    const auto extreme = ops::cross_entropy_2class(T({1, 2}, {800, -800}), std::vector<std::uint8_t>{1});
    CHECK(extreme.item() == doctest::Approx(1600.0));
    CHECK_THROWS_AS(ops::cross_entropy_2class(T::zeros({2, 2}), std::vector<std::uint8_t>{0, 2}), ArgumentError);
    CHECK_THROWS_AS(ops::cross_entropy_2class(T::zeros({2, 2}), std::vector<std::uint8_t>{0}), DimensionError);
  }
}
