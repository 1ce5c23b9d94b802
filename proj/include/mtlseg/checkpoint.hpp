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

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mtlseg/model.hpp"

// Flat binary checkpoints: "MTLSEG1\n", then per entry a u32 name length, the
// UTF-8 name, a u32 rank, u32 extents and raw float32 values, all
// little-endian. Model checkpoints also carry "meta.encoder" and
// "meta.decoder" entries holding the integer configuration, so a file is
// enough to rebuild the model.

namespace mtlseg {

struct CheckpointEntry {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

void write_checkpoint(const std::filesystem::path& path, const std::vector<CheckpointEntry>& entries);

/// Throws FormatError with the byte offset of the first malformed field.
std::vector<CheckpointEntry> read_checkpoint(const std::filesystem::path& path);

template <typename Real>
std::vector<CheckpointEntry> model_entries(const MultiTaskSegmenter<Real>& model);

template <typename Real>
void save_model(const MultiTaskSegmenter<Real>& model, const std::filesystem::path& path);

/// Rebuilds the model from the meta entries and loads every parameter.
MultiTaskSegmenter<float> load_model(const std::filesystem::path& path);

/// Model configuration stored in a checkpoint.
ModelConfig checkpoint_config(const std::vector<CheckpointEntry>& entries, const std::string& source = "checkpoint");

/// Copies entry values into matching parameters; every parameter must be
/// present with the same shape.
template <typename Real>
void load_parameters(ParamStore<Real>& store, const std::vector<CheckpointEntry>& entries,
                     const std::string& source = "checkpoint");

}  // namespace mtlseg
