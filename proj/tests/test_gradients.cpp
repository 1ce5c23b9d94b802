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

#include <functional>
#include <string>

#include "mtlseg/gradcheck.hpp"
#include "mtlseg/layers.hpp"
#include "mtlseg/model.hpp"
#include "mtlseg/ops.hpp"
#include "mtlseg/train.hpp"
#include "op_cases.hpp"
#include "oracles.hpp"

using namespace mtlseg;
using T = Tensor<double>;

namespace {

constexpr std::uint64_t kSeeds[] = {101, 202, 303};

T random_param(std::mt19937_64& rng, Shape shape, double lo = -1, double hi = 1) {
  const auto n = shape_numel(shape);
  return T(std::move(shape), oracle::random_vector(rng, n, lo, hi), true);
}

// Key biases have an identically zero gradient: adding a constant to every
// key shifts each score row uniformly, which softmax ignores. Their central
// differences are pure roundoff, so they are checked separately.
bool is_key_bias(const std::string& name) { return name.ends_with(".key.bias"); }

template <typename Store>
void split_params(const Store& store, std::vector<T>& checked, std::vector<T>& key_biases) {
  for (const auto& [name, t] : store.entries()) (is_key_bias(name) ? key_biases : checked).push_back(t);
}

void perturb(const std::vector<T>& params, std::mt19937_64& rng, double amplitude) {
  for (auto t : params) {
    auto d = t.mutable_data();
    const auto noise = oracle::random_vector(rng, d.size(), -amplitude, amplitude);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += noise[i];
  }
}

void check_key_biases_vanish(const std::function<T()>& f, const std::vector<T>& key_biases) {
  REQUIRE_FALSE(key_biases.empty());
  const auto report = grad_check(f, key_biases);
  for (const auto& g : report.analytic)
    for (double v : g) CHECK(std::abs(v) < 1e-12);
  CHECK(report.max_abs_error < 1e-8);
}

}  // namespace

TEST_SUITE("gradients") {
  TEST_CASE("grad_check reference cases") {
    std::mt19937_64 rng(1);
    const auto x = random_param(rng, {6});
    const auto sum_report = grad_check([&] { return ops::sum(x); }, {x});
    CHECK(sum_report.max_rel_error < 1e-9);
    for (double g : sum_report.analytic[0]) CHECK(g == doctest::Approx(1.0));
    // The sum of a softmax is identically one, so the gradient vanishes.
    const auto sm = grad_check([&] { return ops::sum(ops::softmax_lastdim(x)); }, {x});
    for (double g : sm.analytic[0]) CHECK(std::abs(g) < 1e-12);
    CHECK(sm.max_abs_error < 1e-9);
  }

  TEST_CASE("grad_check rejects non-finite objectives") {
    const T x({1}, {1e300}, true);
    CHECK_THROWS(grad_check([&] { return ops::sum(ops::mul(x, x)); }, {x}));
  }

  TEST_CASE("every differentiable op passes central differences at 1e-6") {
    for (const auto seed : kSeeds) {
      CAPTURE(seed);
      std::mt19937_64 rng(seed);
      for (const auto& c : test::op_cases(rng)) {
        CAPTURE(c.name);
        CHECK(test::op_rel_error(c, rng) <= 1e-6);
      }
    }
  }

  TEST_CASE("attention and Mix-FFN layers pass at 1e-5") {
    for (const auto seed : kSeeds) {
      CAPTURE(seed);
      std::mt19937_64 rng(seed);
      ParamStore<double> store;
      Initializer init(seed);
      const auto attn = make_attention<double>(store, init, "attn", 8, 2, 2);
      const auto ffn = make_mix_ffn<double>(store, init, "ffn", 8, 2);
      // Non-trivial norm and bias values exercise every path.
      perturb(store.tensors(), rng, 0.2);
      const auto x = random_param(rng, {4, 4, 8});
      std::vector<T> params, key_biases;
      split_params(store, params, key_biases);
      params.push_back(x);
      const auto w1 = T({4, 4, 8}, oracle::random_vector(rng, 128));
      const auto attn_loss = [&] { return ops::sum(ops::mul(efficient_self_attention(attn, x), w1)); };
      GradCheckOptions opts;
      opts.eps = 1e-5;
      const auto r1 = grad_check(attn_loss, params, opts);
      CHECK(r1.max_rel_error <= 1e-5);
      check_key_biases_vanish(attn_loss, key_biases);
      const auto r2 = grad_check([&] { return ops::sum(ops::mul(mix_ffn(ffn, x), w1)); }, params, opts);
      CHECK(r2.max_rel_error <= 1e-5);
    }
  }

  TEST_CASE("full model loss on a 32x32 T0 sample passes at 1e-4") {
    ModelConfig cfg;
    MultiTaskSegmenter<double> model(cfg, 5);
    std::mt19937_64 rng(5);
    // The default initialisation leaves deep gradients near 1e-8, below what
    // central differences resolve; trained-scale weights avoid that.
    perturb(model.params().tensors(), rng, 0.2);
    std::vector<std::uint8_t> rgb(32 * 32 * 3);
    for (auto& v : rgb) v = static_cast<std::uint8_t>(rng() & 0xFF);
    const auto l1 = oracle::random_mask(rng, 32 * 32, 0.3), l2 = oracle::random_mask(rng, 32 * 32, 0.1);
    const std::vector<std::span<const std::uint8_t>> labels{l1, l2};
    const auto image = image_to_tensor<double>(rgb, 32, 32);
    const auto loss = [&] { return mtl_loss(model.forward(image), labels); };
    std::vector<T> params, key_biases;
    split_params(model.params(), params, key_biases);
    GradCheckOptions opts;
    opts.eps = 1e-5;
    opts.max_coords_per_tensor = 3;
    opts.seed = 5;
    const auto report = grad_check(loss, params, opts);
    CAPTURE(report.worst);
    CHECK(report.max_rel_error <= 1e-4);
    check_key_biases_vanish(loss, key_biases);
  }
}
