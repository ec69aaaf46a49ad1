/*
 * Copyright 2026 The tinv Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Bundled synthetic corpus: smooth colour gradients, rotated checkers and
// stripes, and band-limited colour noise. Images 0..15 form the training
// split, 16..23 the held-out split.

#include <filesystem>
#include <string>
#include <vector>

#include "tinv/feature_map.hpp"

namespace tinv {

inline constexpr int kCorpusSize = 24;
inline constexpr int kCorpusTrainSize = 16;
inline constexpr Index kCorpusImageSize = 64;

struct NamedImage {
  std::string name;
  FeatureMap image;  // 1x3xHxW, 8-bit grid values
};

/// Deterministically synthesises the corpus (already quantize8'd).
std::vector<NamedImage> generate_corpus();

/// Writes generate_corpus() as PNG files into `dir`.
void write_corpus(const std::filesystem::path& dir);

/// Loads every image in `dir` (sorted by name).
std::vector<NamedImage> load_image_dir(const std::filesystem::path& dir);

struct CorpusSplit {
  std::vector<FeatureMap> train;
  std::vector<FeatureMap> held_out;
};

/// Loads the shipped corpus and splits it; IoError if files are missing.
CorpusSplit load_corpus_split(const std::filesystem::path& dir);

}  // namespace tinv
