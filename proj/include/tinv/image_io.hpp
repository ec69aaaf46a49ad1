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

#include <filesystem>
#include <vector>

#include "tinv/feature_map.hpp"

namespace tinv {

/// Reads an 8-bit PNG or a binary PPM (P6, maxval 255) as a 1x3xHxW map in
/// [0, 1]. Grey and alpha PNGs are converted to RGB. Other formats and bit
/// depths raise IoError.
FeatureMap load_image(const std::filesystem::path& path);

/// Writes a single 3-channel map as 8-bit PNG or PPM (chosen by extension)
/// after quantize8. Loading the file back yields quantize8(x) exactly.
void save_image(const FeatureMap& x, const std::filesystem::path& path);

/// Image files (.png, .ppm) in `dir`, sorted by file name.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

}  // namespace tinv
