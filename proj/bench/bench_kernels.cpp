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

// Serial versus OpenMP kernels on the shapes the T0 model sees at 64x64,
// plus one full forward/backward step for context.
//
//   ./build/bench/bench_kernels --benchmark_filter=gemm

#include <benchmark/benchmark.h>

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mtlseg/kernels.hpp"
#include "mtlseg/model.hpp"
#include "mtlseg/ops.hpp"
#include "mtlseg/train.hpp"

namespace k = mtlseg::kernels;

namespace {

std::vector<float> random_values(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

void bench_gemm(benchmark::State& state, bool parallel) {
  const auto m = static_cast<std::size_t>(state.range(0)), n = static_cast<std::size_t>(state.range(1)),
             kk = static_cast<std::size_t>(state.range(2));
  const auto a = random_values(m * kk, 1), b = random_values(kk * n, 2);
  std::vector<float> c(m * n);
  const auto run = parallel ? k::parallel::gemm<float> : k::serial::gemm<float>;
  for (auto _ : state) {
    run(false, false, m, n, kk, a, b, c, false);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m * n * kk));
}

k::ConvGeometry conv_geometry(std::size_t size, std::size_t in_c, std::size_t out_c, std::size_t kernel,
                              std::size_t stride, std::size_t groups) {
  k::ConvGeometry g;
  g.in_h = g.in_w = size;
  g.in_c = in_c;
  g.out_c = out_c;
  g.kernel = kernel;
  g.stride = stride;
  g.pad = kernel / 2;
  g.groups = groups;
  g.out_h = g.out_w = (size + 2 * g.pad - kernel) / stride + 1;
  return g;
}

void bench_conv(benchmark::State& state, bool parallel, k::ConvGeometry g, bool backward) {
  const auto x = random_values(g.in_h * g.in_w * g.in_c, 3);
  const auto w = random_values(g.kernel * g.kernel * g.in_per_group() * g.out_c, 4);
  const auto bias = random_values(g.out_c, 5);
  const auto dout = random_values(g.out_h * g.out_w * g.out_c, 6);
  std::vector<float> out(g.out_h * g.out_w * g.out_c), dw(w.size()), db(g.out_c), dx(x.size());
  for (auto _ : state) {
    if (!backward) {
      (parallel ? k::parallel::conv2d_forward<float> : k::serial::conv2d_forward<float>)(g, x, w, bias, out);
      benchmark::DoNotOptimize(out.data());
    } else {
      (parallel ? k::parallel::conv2d_backward_weight<float> : k::serial::conv2d_backward_weight<float>)(g, x, dout,
                                                                                                          dw, db);
      (parallel ? k::parallel::conv2d_backward_input<float> : k::serial::conv2d_backward_input<float>)(g, dout, w,
                                                                                                        dx);
      benchmark::DoNotOptimize(dx.data());
    }
  }
}

void bench_softmax(benchmark::State& state, bool parallel) {
  const auto rows = static_cast<std::size_t>(state.range(0)), cols = static_cast<std::size_t>(state.range(1));
  const auto in = random_values(rows * cols, 7);
  std::vector<float> out(in.size());
  for (auto _ : state) {
    (parallel ? k::parallel::softmax_rows<float> : k::serial::softmax_rows<float>)(rows, cols, in, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void bench_train_step(benchmark::State& state) {
  const auto size = static_cast<std::size_t>(state.range(0));
  mtlseg::MultiTaskSegmenter<float> model(mtlseg::ModelConfig{}, 1);
  std::vector<std::uint8_t> rgb(size * size * 3);
  std::mt19937_64 rng(8);
  for (auto& v : rgb) v = static_cast<std::uint8_t>(rng() & 0xFF);
  std::vector<std::uint8_t> line(size * size), gap(size * size);
  for (std::size_t i = 0; i < line.size(); ++i) {
    line[i] = (i / size) % 8 == 0;
    gap[i] = i % 97 == 0;
  }
  const std::vector<std::span<const std::uint8_t>> labels{line, gap};
  const auto image = mtlseg::image_to_tensor<float>(rgb, size, size);
  for (auto _ : state) {
    model.params().zero_grad();
    auto loss = mtlseg::mtl_loss(model.forward(image), labels);
    loss.backward();
    benchmark::DoNotOptimize(loss.item());
  }
}

void register_all() {
  for (const bool parallel : {false, true}) {
    const std::string tag = parallel ? "parallel" : "serial";
    // Stage-1 query projection and the 1/4-grid attention scores.
    benchmark::RegisterBenchmark(("gemm/" + tag).c_str(), bench_gemm, parallel)
        ->Args({256, 8, 8})
        ->Args({256, 16, 16})
        ->Args({1024, 64, 64})
        ->Args({256, 256, 64});
    benchmark::RegisterBenchmark(("conv_patch_embed/" + tag).c_str(), bench_conv, parallel,
                                 conv_geometry(64, 3, 8, 7, 4, 1), false);
    benchmark::RegisterBenchmark(("conv_depthwise/" + tag).c_str(), bench_conv, parallel,
                                 conv_geometry(16, 64, 64, 3, 1, 64), false);
    benchmark::RegisterBenchmark(("conv_patch_embed_backward/" + tag).c_str(), bench_conv, parallel,
                                 conv_geometry(64, 3, 8, 7, 4, 1), true);
    benchmark::RegisterBenchmark(("softmax_rows/" + tag).c_str(), bench_softmax, parallel)
        ->Args({256, 16})
        ->Args({256, 256});
  }
  benchmark::RegisterBenchmark("train_step_t0", bench_train_step)->Arg(64)->Unit(benchmark::kMillisecond);
}

}  // namespace

int main(int argc, char** argv) {
  register_all();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
