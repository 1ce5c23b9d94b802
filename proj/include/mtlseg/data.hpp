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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mtlseg {

/// RGB image plus one binary mask per task.
struct Sample {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> image;  // h * w * 3
  std::vector<std::string> task_names;
  std::vector<std::vector<std::uint8_t>> masks;  // per task, h * w values in {0, 1}
  std::vector<std::pair<std::string, std::string>> meta;

  std::string meta_value(const std::string& key) const;
  bool operator==(const Sample&) const = default;
};

/// Parallel crop rows with missing-plant gaps. Tasks: line, gap.
struct CropSceneParams {
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t line_count = 8;
  double line_spacing = 14.0;
  double angle = 0.3;  // radians, row direction measured from the x axis
  double thickness = 3.0;
  std::size_t gap_count = 2;
  double gap_length = 10.0;
  double plant_noise = 0.3;
  double background_texture = 0.3;
  double clutter = 0.3;
  std::uint64_t seed = 0;
};

/// Perturbed-ellipse leaf with interior holes and edge bites. Tasks: leaf,
/// defoliation.
struct LeafSceneParams {
  std::size_t height = 64;
  std::size_t width = 64;
  double axis_major = 24.0;
  double axis_minor = 16.0;
  double rotation = 0.0;
  double center_row = 32.0;
  double center_col = 32.0;
  double boundary_amplitude = 0.08;
  std::size_t hole_count = 1;
  double hole_radius = 3.0;
  std::size_t bite_count = 1;
  double bite_radius = 6.0;
  double clutter = 0.3;
  std::uint64_t seed = 0;
};

/// 1-px row trajectories (sampled once per step along the dominant axis) are
/// the line labels; gap labels are the trajectory pixels where plants are
/// missing, rendered with background appearance. Throws ParameterError for
/// impossible geometry.
Sample gen_crop_scene(const CropSceneParams& params);

/// Throws ParameterError when the leaf does not fit in the frame.
Sample gen_leaf_scene(const LeafSceneParams& params);

/// Randomised scene parameters for sample `index` of a dataset with `seed`.
CropSceneParams random_crop_params(std::size_t size, std::uint64_t seed, std::size_t index);
LeafSceneParams random_leaf_params(std::size_t size, std::uint64_t seed, std::size_t index);

/// Dilation with an element x element square anchored at ((element-1)/2,
/// (element-1)/2): every set pixel p switches on p + [-a, element-1-a]^2.
std::vector<std::uint8_t> dilate_mask(std::span<const std::uint8_t> mask, std::size_t height, std::size_t width,
                                      std::size_t element = 6);

/// Writes <stem>.ppm, <stem>.task<k>.pgm (k from 1) and <stem>.meta into `dir`.
void write_sample(const std::filesystem::path& dir, const std::string& stem, const Sample& sample);

/// Reads a sample written by write_sample; tasks are declared in the .meta
/// file. Throws FormatError on any malformed or missing piece.
Sample read_sample(const std::filesystem::path& dir, const std::string& stem);

struct Dataset {
  std::string kind;  // "crop" or "leaf"
  std::vector<std::string> task_names;
  std::vector<bool> thin;  // thin tasks get dilated training labels and detection metrics
  std::vector<std::string> stems;
  std::vector<Sample> samples;
};

/// Generates `count` samples of `kind` ("crop" or "leaf") in memory.
Dataset generate_dataset(const std::string& kind, std::size_t count, std::size_t size, std::uint64_t seed);

/// Writes every sample and manifest.txt.
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset);

/// Reads manifest.txt and every sample it lists.
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace mtlseg
