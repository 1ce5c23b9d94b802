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

#include "mtlseg/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>

#include "mtlseg/errors.hpp"

namespace mtlseg {

namespace {

constexpr std::string_view kMagic = "MTLSEG1\n";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

class Reader {
 public:
  Reader(std::string bytes, std::string file) : bytes_(std::move(bytes)), file_(std::move(file)) {}

  bool done() const { return pos_ == bytes_.size(); }
  std::size_t pos() const { return pos_; }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::string take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  [[noreturn]] void fail(const std::string& what) const { throw FormatError(file_, pos_, what); }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) fail(std::string("truncated ") + what);
  }

  std::string bytes_;
  std::string file_;
  std::size_t pos_ = 0;
};

std::vector<float> meta_values(std::initializer_list<std::size_t> values) {
  std::vector<float> out;
  for (auto v : values) out.push_back(static_cast<float>(v));
  return out;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const std::vector<CheckpointEntry>& entries) {
  std::string out(kMagic);
  for (const auto& e : entries) {
    if (shape_numel(e.shape) != e.values.size())
      throw DimensionError("checkpoint entry " + e.name + ": shape does not match value count");
    put_u32(out, static_cast<std::uint32_t>(e.name.size()));
    out += e.name;
    put_u32(out, static_cast<std::uint32_t>(e.shape.size()));
    for (auto extent : e.shape) put_u32(out, static_cast<std::uint32_t>(extent));
    for (float v : e.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<CheckpointEntry> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError(path.string(), 0, "cannot open checkpoint");
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader in(std::move(bytes), path.string());
  if (in.take(kMagic.size(), "magic") != kMagic) throw FormatError(path.string(), 0, "bad magic");
  std::vector<CheckpointEntry> entries;
  while (!in.done()) {
    CheckpointEntry e;
    const auto name_len = in.u32("name length");
    e.name = in.take(name_len, "name");
    const auto rank = in.u32("rank");
    if (rank == 0 || rank > 8) in.fail("implausible rank " + std::to_string(rank));
    for (std::uint32_t i = 0; i < rank; ++i) {
      const auto extent = in.u32("extent");
      if (extent == 0) in.fail("zero extent in " + e.name);
      e.shape.push_back(extent);
    }
    const auto n = shape_numel(e.shape);
    e.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) e.values[i] = std::bit_cast<float>(in.u32("values"));
    entries.push_back(std::move(e));
  }
  return entries;
}

template <typename Real>
std::vector<CheckpointEntry> model_entries(const MultiTaskSegmenter<Real>& model) {
  const auto& enc = model.config().encoder;
  const auto& dec = model.config().decoder;
  std::vector<CheckpointEntry> entries;
  entries.push_back({"meta.encoder",
                     {17},
                     meta_values({enc.embed_dims[0], enc.embed_dims[1], enc.embed_dims[2], enc.embed_dims[3],
                                  enc.depths[0], enc.depths[1], enc.depths[2], enc.depths[3], enc.heads[0],
                                  enc.heads[1], enc.heads[2], enc.heads[3], enc.reductions[0], enc.reductions[1],
                                  enc.reductions[2], enc.reductions[3], enc.mlp_ratio})});
  entries.push_back({"meta.decoder",
                     {6},
                     meta_values({dec.channels, dec.tasks, dec.heads, dec.cross_reduction, dec.mlp_ratio,
                                  dec.cross_attention ? std::size_t{1} : std::size_t{0}})});
  for (const auto& [name, t] : model.params().entries()) {
    const auto d = t.data();
    entries.push_back({name, t.shape(), std::vector<float>(d.begin(), d.end())});
  }
  return entries;
}

template <typename Real>
void save_model(const MultiTaskSegmenter<Real>& model, const std::filesystem::path& path) {
  write_checkpoint(path, model_entries(model));
}

ModelConfig checkpoint_config(const std::vector<CheckpointEntry>& entries, const std::string& source) {
  const CheckpointEntry* enc = nullptr;
  const CheckpointEntry* dec = nullptr;
  for (const auto& e : entries) {
    if (e.name == "meta.encoder") enc = &e;
    if (e.name == "meta.decoder") dec = &e;
  }
  if (!enc || enc->values.size() != 17 || !dec || dec->values.size() != 6)
    throw FormatError(source, 0, "missing or malformed meta.encoder / meta.decoder entries");
  auto as_size = [&](float v) {
    if (v < 0 || v != static_cast<float>(static_cast<std::size_t>(v)))
      throw FormatError(source, 0, "non-integer configuration value");
    return static_cast<std::size_t>(v);
  };
  ModelConfig cfg;
  for (std::size_t i = 0; i < 4; ++i) {
    cfg.encoder.embed_dims[i] = as_size(enc->values[i]);
    cfg.encoder.depths[i] = as_size(enc->values[4 + i]);
    cfg.encoder.heads[i] = as_size(enc->values[8 + i]);
    cfg.encoder.reductions[i] = as_size(enc->values[12 + i]);
  }
  cfg.encoder.mlp_ratio = as_size(enc->values[16]);
  cfg.encoder.name = "custom";
  for (const auto& preset : {EncoderConfig::b0(), EncoderConfig::t0()}) {
    auto probe = cfg.encoder;
    probe.name = preset.name;
    if (probe == preset) cfg.encoder.name = preset.name;
  }
  cfg.decoder.channels = as_size(dec->values[0]);
  cfg.decoder.tasks = as_size(dec->values[1]);
  cfg.decoder.heads = as_size(dec->values[2]);
  cfg.decoder.cross_reduction = as_size(dec->values[3]);
  cfg.decoder.mlp_ratio = as_size(dec->values[4]);
  cfg.decoder.cross_attention = as_size(dec->values[5]) != 0;
  return cfg;
}

template <typename Real>
void load_parameters(ParamStore<Real>& store, const std::vector<CheckpointEntry>& entries, const std::string& source) {
  for (const auto& [name, t] : store.entries()) {
    const CheckpointEntry* match = nullptr;
    for (const auto& e : entries)
      if (e.name == name) match = &e;
    if (!match) throw FormatError(source, 0, "parameter " + name + " missing");
    if (match->shape != t.shape())
      throw FormatError(source, 0,
                        "parameter " + name + " has shape " + shape_str(match->shape) + ", expected " + shape_str(t.shape()));
    auto dst = Tensor<Real>(t).mutable_data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<Real>(match->values[i]);
  }
}

MultiTaskSegmenter<float> load_model(const std::filesystem::path& path) {
  const auto entries = read_checkpoint(path);
  MultiTaskSegmenter<float> model(checkpoint_config(entries, path.string()), 0);
  load_parameters(model.params(), entries, path.string());
  return model;
}

template std::vector<CheckpointEntry> model_entries(const MultiTaskSegmenter<float>&);
template std::vector<CheckpointEntry> model_entries(const MultiTaskSegmenter<double>&);
template void save_model(const MultiTaskSegmenter<float>&, const std::filesystem::path&);
template void save_model(const MultiTaskSegmenter<double>&, const std::filesystem::path&);
template void load_parameters(ParamStore<float>&, const std::vector<CheckpointEntry>&, const std::string&);
template void load_parameters(ParamStore<double>&, const std::vector<CheckpointEntry>&, const std::string&);

}  // namespace mtlseg
