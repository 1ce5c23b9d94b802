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

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mtlseg/attention_map.hpp"
#include "mtlseg/checkpoint.hpp"
#include "mtlseg/data.hpp"
#include "mtlseg/errors.hpp"
#include "mtlseg/gradcheck.hpp"
#include "mtlseg/image_io.hpp"
#include "mtlseg/metrics.hpp"
#include "mtlseg/tiling.hpp"
#include "mtlseg/train.hpp"

using namespace mtlseg;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

std::pair<std::size_t, std::size_t> parse_pixel(const std::string& text) {
  std::size_t row = 0, col = 0;
  char comma = 0;
  std::istringstream in(text);
  if (!(in >> row >> comma >> col) || comma != ',' || !in.eof())
    throw ArgumentError("--pixel expects row,col, got '" + text + "'");
  return {row, col};
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ArgumentError("--seeds expects comma-separated integers, got '" + text + "'");
    }
  }
  if (seeds.empty()) throw ArgumentError("--seeds is empty");
  return seeds;
}

GrayImage grey(std::size_t h, std::size_t w, std::vector<std::uint8_t> pixels) { return {h, w, std::move(pixels)}; }

struct Options {
  std::uint64_t seed = 0;
  bool seed_set = false;

  // gen-data
  std::string kind = "crop";
  std::size_t count = 64, size = 64;
  std::string out;

  // train / ablate
  std::string config;
  std::size_t iterations = 0;
  std::string eval_data;
  std::string seeds = "1,2,3";

  // eval / infer / attn-dump
  std::string ckpt, data, image, mode = "direct", pixel;
  std::size_t patch = 64, task = 1, source = 0;
  bool tsv = false;

  // gradcheck
  std::size_t coords = 3;
  double eps = 1e-4;
  double tolerance = 1e-4;
};

int cmd_gen_data(const Options& o) {
  const auto ds = generate_dataset(o.kind, o.count, o.size, o.seed);
  write_dataset(o.out, ds);
  std::cout << "samples=" << ds.samples.size() << "\nkind=" << ds.kind << "\nout=" << o.out << '\n';
  return kOk;
}

int cmd_train(const Options& o) {
  auto cfg = load_train_config(o.config);
  if (o.seed_set) cfg.seed = o.seed;
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.iterations) cfg.iterations = o.iterations;
  if (cfg.data.empty()) throw ConfigError("config " + o.config + " does not set data");
  const auto ds = load_dataset(cfg.data);
  const auto result = train(cfg, ds, &std::cout);
  std::cout << "parameters=" << result.model->params().count() << '\n';
  return kOk;
}

int cmd_eval(const Options& o) {
  const auto model = load_model(o.ckpt);
  const auto ds = load_dataset(o.data);
  if (ds.task_names.size() != model.config().decoder.tasks)
    throw ArgumentError("dataset has " + std::to_string(ds.task_names.size()) + " tasks, checkpoint " +
                        std::to_string(model.config().decoder.tasks));
  SamplePredictor predictor;
  if (o.mode == "direct")
    predictor = direct_predictor(model);
  else if (o.mode == "tiled")
    predictor = tiled_predictor(model, o.patch);
  else
    throw ArgumentError("--mode must be direct or tiled");
  const auto report = evaluate_dataset(ds, predictor);
  std::cout << report.to_key_values();
  if (o.tsv) std::cout << report.tsv_header() << '\n' << report.tsv_row() << '\n';
  return kOk;
}

int cmd_infer_tile(const Options& o) {
  const auto model = load_model(o.ckpt);
  const auto img = read_ppm(o.image);
  const std::size_t tasks = model.config().decoder.tasks;
  const auto result = infer_full(img.pixels, img.height, img.width, o.patch, tasks, model_predictor(model));
  std::vector<std::uint8_t> merged(result.labels.size());
  for (std::size_t i = 0; i < merged.size(); ++i) merged[i] = label_grey(result.labels[i], tasks);
  write_pgm(o.out + ".merged.pgm", grey(img.height, img.width, merged));
  for (std::size_t k = 0; k < tasks; ++k) {
    auto skel = result.skeletons[k];
    for (auto& v : skel) v = v ? 255 : 0;
    write_pgm(o.out + ".skeleton.task" + std::to_string(k + 1) + ".pgm", grey(img.height, img.width, skel));
  }
  std::cout << "patches=" << make_grid(img.height, img.width, o.patch).size() << "\nmerged=" << o.out << ".merged.pgm\n";
  return kOk;
}

int cmd_attn_dump(const Options& o) {
  const auto model = load_model(o.ckpt);
  const std::size_t tasks = model.config().decoder.tasks;
  if (!model.config().decoder.cross_attention) throw ArgumentError("checkpoint has no cross-task attention");
  if (o.task < 1 || o.task > tasks) throw ArgumentError("--task must be in 1.." + std::to_string(tasks));
  const std::size_t query = o.task - 1;
  std::size_t source = o.source ? o.source - 1 : (query == 0 ? 1 : 0);
  if (o.source && (o.source > tasks || source == query))
    throw ArgumentError("--source must name another task in 1.." + std::to_string(tasks));
  const auto img = read_ppm(o.image);
  std::vector<AttentionRecord<float>> records;
  {
    NoGradGuard guard;
    model.forward(image_to_tensor<float>(img.pixels, img.height, img.width), &records);
  }
  const auto [row, col] = parse_pixel(o.pixel);
  for (const auto& rec : records) {
    if (rec.task != query || rec.source != source) continue;
    const auto map = export_attention(rec, row, col);
    write_pgm(o.out, grey(map.height, map.width, map.to_grey()));
    std::cout << "grid=" << map.height << "x" << map.width << "\ntask=" << o.task << "\nsource=" << source + 1
              << "\nout=" << o.out << '\n';
    return kOk;
  }
  throw ArgumentError("no attention record for task " + std::to_string(o.task));
}

int cmd_gradcheck(const Options& o) {
  ModelGradCheckOptions opts;
  opts.size = o.size;
  opts.seed = o.seed;
  opts.coords_per_tensor = o.coords;
  opts.eps = o.eps;
  const auto r = check_model_gradients(opts);
  std::printf("coordinates=%zu\nmax_rel_error=%.3e\nmax_abs_error=%.3e\nworst=%s\n", r.report.coordinates,
              r.report.max_rel_error, r.report.max_abs_error, r.report.worst.c_str());
  std::printf("key_bias.max_grad=%.3e\nkey_bias.max_abs_error=%.3e\n", r.key_bias_max_grad, r.key_bias_max_abs_error);
  const bool ok = r.report.max_rel_error <= o.tolerance && r.key_bias_max_grad < 1e-12 && r.key_bias_max_abs_error < 1e-8;
  std::cout << "status=" << (ok ? "pass" : "fail") << '\n';
  return ok ? kOk : kNumeric;
}

int cmd_ablate(const Options& o) {
  auto cfg = load_train_config(o.config);
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.iterations) cfg.iterations = o.iterations;
  if (cfg.data.empty()) throw ConfigError("config " + o.config + " does not set data");
  const auto train_set = load_dataset(cfg.data);
  const auto eval_set = o.eval_data.empty() ? train_set : load_dataset(o.eval_data);
  const auto result = ablate_decoder(cfg, train_set, eval_set, parse_seeds(o.seeds), &std::cerr);
  std::cout << result.table();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-task transformer segmentation toolkit"};
  app.require_subcommand(1);
  Options o;
  auto seed_opt = [&](CLI::App* sub) {
    sub->add_option_function<std::uint64_t>(
        "--seed",
        [&](std::uint64_t v) {
          o.seed = v;
          o.seed_set = true;
        },
        "Random seed");
  };

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  gen->add_option("--kind", o.kind, "crop or leaf")->check(CLI::IsMember({"crop", "leaf"}));
  gen->add_option("--count", o.count, "Number of samples")->check(CLI::PositiveNumber);
  gen->add_option("--size", o.size, "Square image extent, a multiple of 32");
  gen->add_option("--out", o.out, "Output directory")->required();
  seed_opt(gen);

  auto* tr = app.add_subcommand("train", "Train a model from a config file");
  tr->add_option("--config", o.config, "key = value config file")->required()->check(CLI::ExistingFile);
  tr->add_option("--out", o.out, "Output directory (overrides out_dir)");
  tr->add_option("--iterations", o.iterations, "Override the iteration count");
  seed_opt(tr);

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  ev->add_option("--ckpt", o.ckpt, "Checkpoint")->required();
  ev->add_option("--data", o.data, "Dataset directory")->required();
  ev->add_option("--mode", o.mode, "direct or tiled");
  ev->add_option("--patch", o.patch, "Patch size for tiled mode");
  ev->add_flag("--tsv", o.tsv, "Also print a tab-separated row");
  seed_opt(ev);

  auto* inf = app.add_subcommand("infer-tile", "Tiled inference on a large image");
  inf->add_option("--ckpt", o.ckpt, "Checkpoint")->required();
  inf->add_option("--image", o.image, "Input PPM")->required();
  inf->add_option("--patch", o.patch, "Patch size");
  inf->add_option("--out", o.out, "Output path prefix")->required();
  seed_opt(inf);

  auto* attn = app.add_subcommand("attn-dump", "Export the cross-task attention map of one pixel");
  attn->add_option("--ckpt", o.ckpt, "Checkpoint")->required();
  attn->add_option("--image", o.image, "Input PPM")->required();
  attn->add_option("--task", o.task, "Query task, 1-based")->required();
  attn->add_option("--source", o.source, "Key/value task, 1-based (default: first other task)");
  attn->add_option("--pixel", o.pixel, "row,col on the h/4 x w/4 grid")->required();
  attn->add_option("--out", o.out, "Output PGM")->required();
  seed_opt(attn);

  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of the full model in double precision");
  gc->add_option("--size", o.size, "Square input extent")->default_val(32);
  gc->add_option("--coords", o.coords, "Coordinates sampled per parameter tensor (0 = all)");
  gc->add_option("--eps", o.eps, "Central-difference step");
  gc->add_option("--tolerance", o.tolerance, "Maximum relative error");
  seed_opt(gc);

  auto* ab = app.add_subcommand("ablate", "Compare the decoder with and without cross-task attention");
  ab->add_option("--config", o.config, "key = value config file")->required()->check(CLI::ExistingFile);
  ab->add_option("--eval-data", o.eval_data, "Evaluation dataset (default: training set)");
  ab->add_option("--seeds", o.seeds, "Comma-separated seeds");
  ab->add_option("--out", o.out, "Output directory for the runs");
  ab->add_option("--iterations", o.iterations, "Override the iteration count");
  seed_opt(ab);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return cmd_gen_data(o);
    if (*tr) return cmd_train(o);
    if (*ev) return cmd_eval(o);
    if (*inf) return cmd_infer_tile(o);
    if (*attn) return cmd_attn_dump(o);
    if (*gc) return cmd_gradcheck(o);
    if (*ab) return cmd_ablate(o);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return kData;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParameterError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
