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

#include "mtlseg/train.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "mtlseg/checkpoint.hpp"
#include "mtlseg/errors.hpp"
#include "mtlseg/ops.hpp"
#include "mtlseg/optim.hpp"
#include "mtlseg/tiling.hpp"

namespace mtlseg {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

}  // namespace

void TrainConfig::validate() const {
  if (iterations == 0) throw ConfigError("iterations must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(base_lr > 0) || !std::isfinite(base_lr)) throw ConfigError("base_lr must be positive");
  if (!(poly_power >= 0)) throw ConfigError("poly_power must be non-negative");
  if (!(weight_decay >= 0)) throw ConfigError("weight_decay must be non-negative");
  if (dilation == 0) throw ConfigError("dilation must be positive");
  EncoderConfig::by_name(encoder);
}

ModelConfig TrainConfig::model_config(std::size_t tasks) const {
  ModelConfig cfg;
  cfg.encoder = EncoderConfig::by_name(encoder);
  cfg.decoder.channels = decoder_channels;
  cfg.decoder.tasks = tasks;
  cfg.decoder.heads = decoder_heads;
  cfg.decoder.cross_reduction = cross_reduction;
  cfg.decoder.cross_attention = cross_attention;
  cfg.decoder.validate();
  return cfg;
}

TrainConfig parse_train_config(const std::string& text, const std::string& source) {
  TrainConfig cfg;
  std::size_t line_no = 0;
  std::string current_key;
  auto fail = [&](const std::string& what) -> ConfigError {
    return ConfigError(source + ":" + std::to_string(line_no) + ": " + what);
  };
  auto as_size = [&](const std::string& v) {
    std::size_t out = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) throw fail("expected a non-negative integer for " + current_key);
    return out;
  };
  auto as_double = [&](const std::string& v) {
    double out = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
    if (r.ec != std::errc{} || r.ptr != v.data() + v.size()) throw fail("expected a number for " + current_key);
    return out;
  };
  auto as_bool = [&](const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw fail("expected true or false for " + current_key);
  };
  const std::map<std::string, std::function<void(const std::string&)>> setters = {
      {"iterations", [&](const std::string& v) { cfg.iterations = as_size(v); }},
      {"batch_size", [&](const std::string& v) { cfg.batch_size = as_size(v); }},
      {"base_lr", [&](const std::string& v) { cfg.base_lr = as_double(v); }},
      {"poly_power", [&](const std::string& v) { cfg.poly_power = as_double(v); }},
      {"weight_decay", [&](const std::string& v) { cfg.weight_decay = as_double(v); }},
      {"seed", [&](const std::string& v) { cfg.seed = as_size(v); }},
      {"encoder", [&](const std::string& v) { cfg.encoder = v; }},
      {"decoder_channels", [&](const std::string& v) { cfg.decoder_channels = as_size(v); }},
      {"decoder_heads", [&](const std::string& v) { cfg.decoder_heads = as_size(v); }},
      {"cross_reduction", [&](const std::string& v) { cfg.cross_reduction = as_size(v); }},
      {"cross_attention", [&](const std::string& v) { cfg.cross_attention = as_bool(v); }},
      {"dilation", [&](const std::string& v) { cfg.dilation = as_size(v); }},
      {"data", [&](const std::string& v) { cfg.data = v; }},
      {"out_dir", [&](const std::string& v) { cfg.out_dir = v; }},
      {"checkpoint_interval", [&](const std::string& v) { cfg.checkpoint_interval = as_size(v); }},
      {"log_interval", [&](const std::string& v) { cfg.log_interval = as_size(v); }},
  };
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw fail("expected key = value");
    current_key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters.find(current_key);
    if (it == setters.end()) throw fail("unknown key '" + current_key + "'");
    it->second(value);
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config " + path.string());
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  auto cfg = parse_train_config(text, path.string());
  if (!cfg.data.empty() && std::filesystem::path(cfg.data).is_relative())
    cfg.data = (path.parent_path() / cfg.data).string();
  if (!cfg.out_dir.empty() && std::filesystem::path(cfg.out_dir).is_relative())
    cfg.out_dir = (path.parent_path() / cfg.out_dir).string();
  return cfg;
}

template <typename Real>
Tensor<Real> mtl_loss(const std::vector<Tensor<Real>>& logits, const std::vector<std::span<const std::uint8_t>>& labels) {
  if (logits.size() != labels.size() || logits.empty())
    throw ArgumentError("mtl_loss: " + std::to_string(logits.size()) + " logit maps for " + std::to_string(labels.size()) +
                        " label sets");
  auto total = ops::cross_entropy_2class(logits[0], labels[0]);
  for (std::size_t t = 1; t < logits.size(); ++t) total = ops::add(total, ops::cross_entropy_2class(logits[t], labels[t]));
  return total;
}

std::string RunLog::format(const LogRecord& r, const std::vector<std::string>& task_names, bool with_time) {
  std::string out = "iter=" + std::to_string(r.iteration) + " lr=" + num(r.lr) + " loss=" + num(r.loss);
  for (std::size_t t = 0; t < r.task_losses.size(); ++t)
    out += " loss." + (t < task_names.size() ? task_names[t] : std::to_string(t)) + "=" + num(r.task_losses[t]);
  if (with_time) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", r.seconds);
    out += std::string(" time=") + buf;
  }
  return out;
}

std::vector<std::vector<std::vector<std::uint8_t>>> training_labels(const Dataset& dataset, std::size_t dilation) {
  std::vector<std::vector<std::vector<std::uint8_t>>> out;
  for (const auto& s : dataset.samples) {
    std::vector<std::vector<std::uint8_t>> per_task;
    for (std::size_t k = 0; k < s.masks.size(); ++k) {
      const bool thin = k < dataset.thin.size() && dataset.thin[k];
      per_task.push_back(thin ? dilate_mask(s.masks[k], s.height, s.width, dilation) : s.masks[k]);
    }
    out.push_back(std::move(per_task));
  }
  return out;
}

namespace {

std::vector<std::span<const std::uint8_t>> spans(const std::vector<std::vector<std::uint8_t>>& masks) {
  return {masks.begin(), masks.end()};
}

}  // namespace

template <typename Real>
double dataset_loss(const MultiTaskSegmenter<Real>& model, const Dataset& dataset,
                    const std::vector<std::vector<std::vector<std::uint8_t>>>& labels) {
  NoGradGuard guard;
  double total = 0;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const auto& s = dataset.samples[i];
    const auto logits = model.forward(image_to_tensor<Real>(s.image, s.height, s.width));
    total += static_cast<double>(mtl_loss(logits, spans(labels[i])).item());
  }
  return total / static_cast<double>(dataset.samples.size());
}

TrainResult train(const TrainConfig& config, const Dataset& dataset, std::ostream* log) {
  config.validate();
  if (dataset.samples.empty()) throw ArgumentError("train: dataset is empty");
  const std::size_t tasks = dataset.task_names.size();
  const auto model_cfg = config.model_config(tasks);
  for (const auto& s : dataset.samples) model_cfg.encoder.validate_input(s.height, s.width);

  TrainResult result;
  result.model = std::make_unique<MultiTaskSegmenter<float>>(model_cfg, config.seed);
  auto& model = *result.model;
  result.log.task_names = dataset.task_names;

  const std::filesystem::path out_dir = config.out_dir;
  std::ofstream log_file;
  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    log_file.open(out_dir / "run.log", std::ios::trunc);
    if (!log_file) throw std::runtime_error("cannot write " + (out_dir / "run.log").string());
  }
  auto emit = [&](const std::string& line) {
    if (log) *log << line << '\n' << std::flush;
    if (log_file) log_file << line << '\n' << std::flush;
  };

  const auto labels = training_labels(dataset, config.dilation);
  std::vector<Tensor<float>> images;
  for (const auto& s : dataset.samples) images.push_back(image_to_tensor<float>(s.image, s.height, s.width));

  AdamWOptions opts;
  opts.base_lr = config.base_lr;
  opts.weight_decay = config.weight_decay;
  opts.total_iters = config.iterations;
  opts.poly_power = config.poly_power;
  AdamW<float> optimizer(model.params().tensors(), opts);

  // Shuffling stream independent of the initialisation stream.
  std::mt19937_64 rng(config.seed ^ 0xA5A5A5A55A5A5A5Aull);
  std::vector<std::size_t> order(dataset.samples.size());
  std::size_t cursor = order.size();
  auto next_index = [&] {
    if (cursor == order.size()) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    return order[cursor++];
  };

  result.log.initial_loss = dataset_loss(model, dataset, labels);
  emit("initial_loss=" + num(result.log.initial_loss));
  const auto start = std::chrono::steady_clock::now();
  try {
    for (std::size_t it = 0; it < config.iterations; ++it) {
      model.params().zero_grad();
      LogRecord rec;
      rec.iteration = it;
      rec.task_losses.assign(tasks, 0.0);
      const float inv_batch = 1.0f / static_cast<float>(config.batch_size);
      for (std::size_t b = 0; b < config.batch_size; ++b) {
        const auto idx = next_index();
        const auto logits = model.forward(images[idx]);
        std::vector<Tensor<float>> per_task;
        for (std::size_t t = 0; t < tasks; ++t) {
          per_task.push_back(ops::cross_entropy_2class(logits[t], labels[idx][t]));
          rec.task_losses[t] += static_cast<double>(per_task.back().item()) / static_cast<double>(config.batch_size);
        }
        auto loss = per_task[0];
        for (std::size_t t = 1; t < tasks; ++t) loss = ops::add(loss, per_task[t]);
        ops::scale(loss, inv_batch).backward();
      }
      rec.lr = optimizer.step();
      rec.loss = std::accumulate(rec.task_losses.begin(), rec.task_losses.end(), 0.0);
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const bool last = it + 1 == config.iterations;
      if (config.log_interval == 0 ? last : (it % config.log_interval == 0 || last)) {
        emit(RunLog::format(rec, dataset.task_names));
        result.log.records.push_back(std::move(rec));
      }
      if (!config.out_dir.empty() && config.checkpoint_interval > 0 && (it + 1) % config.checkpoint_interval == 0)
        save_model(model, out_dir / ("ckpt_" + std::to_string(it + 1) + ".ckpt"));
    }
  } catch (const NumericError&) {
    // The optimiser refuses non-finite gradients before touching parameters,
    // so the current weights are the last good ones.
    if (!config.out_dir.empty()) save_model(model, out_dir / "last_good.ckpt");
    throw;
  }
  result.log.final_loss = dataset_loss(model, dataset, labels);
  emit("final_loss=" + num(result.log.final_loss));
  if (!config.out_dir.empty()) save_model(model, out_dir / "last.ckpt");
  return result;
}

template <typename Real>
SamplePredictor direct_predictor(const MultiTaskSegmenter<Real>& model) {
  return [&model](const Sample& s) {
    NoGradGuard guard;
    const auto logits = model.forward(image_to_tensor<Real>(s.image, s.height, s.width));
    std::vector<std::vector<std::uint8_t>> masks;
    for (const auto& l : logits) masks.push_back(argmax_mask(l));
    return priority_labels(masks);
  };
}

template <typename Real>
SamplePredictor tiled_predictor(const MultiTaskSegmenter<Real>& model, std::size_t patch) {
  return [&model, patch](const Sample& s) {
    return infer_full(s.image, s.height, s.width, patch, model.config().decoder.tasks, model_predictor(model)).labels;
  };
}

std::string AblationResult::table() const {
  std::string out = "variant\tparameters";
  for (const auto& t : task_names) out += "\t" + t + ".f1\t" + t + ".iou";
  out += '\n';
  for (const auto& r : rows) {
    out += r.variant + "\t" + std::to_string(r.parameters);
    for (std::size_t t = 0; t < r.f1.size(); ++t) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "\t%.4f\t%.4f", r.f1[t], r.iou[t]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

AblationResult ablate_decoder(const TrainConfig& config, const Dataset& train_set, const Dataset& eval_set,
                              const std::vector<std::uint64_t>& seeds, std::ostream* log) {
  if (seeds.empty()) throw ArgumentError("ablate_decoder: no seeds");
  AblationResult result;
  result.task_names = train_set.task_names;
  result.seeds = seeds;
  const std::size_t tasks = train_set.task_names.size();
  for (const bool cross : {true, false}) {
    AblationRow row;
    row.variant = cross ? "mtl" : "single";
    row.f1.assign(tasks, 0.0);
    row.iou.assign(tasks, 0.0);
    for (const auto seed : seeds) {
      auto cfg = config;
      cfg.seed = seed;
      cfg.cross_attention = cross;
      if (!config.out_dir.empty())
        cfg.out_dir = (std::filesystem::path(config.out_dir) / (row.variant + "_seed" + std::to_string(seed))).string();
      if (log) *log << "# training " << row.variant << " seed=" << seed << '\n';
      auto trained = train(cfg, train_set, log);
      row.parameters = trained.model->params().count();
      auto report = evaluate_dataset(eval_set, direct_predictor(*trained.model), {3.0, cfg.dilation});
      for (std::size_t t = 0; t < tasks; ++t) {
        const auto s = seg_scores(report.classes[t].seg);
        row.f1[t] += s.f1 / static_cast<double>(seeds.size());
        row.iou[t] += s.iou / static_cast<double>(seeds.size());
      }
      row.per_seed.push_back(std::move(report));
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

template Tensor<float> mtl_loss(const std::vector<Tensor<float>>&, const std::vector<std::span<const std::uint8_t>>&);
template Tensor<double> mtl_loss(const std::vector<Tensor<double>>&, const std::vector<std::span<const std::uint8_t>>&);
template double dataset_loss(const MultiTaskSegmenter<float>&, const Dataset&,
                             const std::vector<std::vector<std::vector<std::uint8_t>>>&);
template double dataset_loss(const MultiTaskSegmenter<double>&, const Dataset&,
                             const std::vector<std::vector<std::vector<std::uint8_t>>>&);
template SamplePredictor direct_predictor(const MultiTaskSegmenter<float>&);
template SamplePredictor direct_predictor(const MultiTaskSegmenter<double>&);
template SamplePredictor tiled_predictor(const MultiTaskSegmenter<float>&, std::size_t);
template SamplePredictor tiled_predictor(const MultiTaskSegmenter<double>&, std::size_t);

ModelGradCheck check_model_gradients(const ModelGradCheckOptions& o) {
  MultiTaskSegmenter<double> model(ModelConfig{}, o.seed);
  std::mt19937_64 rng(o.seed + 1);
  std::uniform_real_distribution<double> noise(-o.perturbation, o.perturbation);
  std::vector<Tensor<double>> checked, key_biases;
  for (const auto& [name, t] : model.params().entries()) {
    auto values = Tensor<double>(t).mutable_data();
    for (auto& v : values) v += noise(rng);
    (name.ends_with(".key.bias") ? key_biases : checked).push_back(t);
  }
  std::vector<std::uint8_t> rgb(o.size * o.size * 3);
  for (auto& v : rgb) v = static_cast<std::uint8_t>(rng() & 0xFF);
  std::vector<std::vector<std::uint8_t>> labels(model.config().decoder.tasks, std::vector<std::uint8_t>(o.size * o.size));
  for (auto& l : labels)
    for (auto& v : l) v = static_cast<std::uint8_t>(rng() & 1);
  const auto image = image_to_tensor<double>(rgb, o.size, o.size);
  const std::vector<std::span<const std::uint8_t>> spans(labels.begin(), labels.end());
  const auto loss = [&] { return mtl_loss(model.forward(image), spans); };

  GradCheckOptions opts;
  opts.eps = o.eps;
  opts.max_coords_per_tensor = o.coords_per_tensor;
  opts.seed = o.seed;
  ModelGradCheck result;
  result.report = grad_check(loss, checked, opts);
  const auto zero = grad_check(loss, key_biases, opts);
  result.key_bias_max_abs_error = zero.max_abs_error;
  for (const auto& g : zero.analytic)
    for (double v : g) result.key_bias_max_grad = std::max(result.key_bias_max_grad, std::abs(v));
  return result;
}

}  // namespace mtlseg
