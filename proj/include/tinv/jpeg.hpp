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

// Baseline-JPEG degradation without entropy coding: 4:4:4 JFIF YCbCr,
// orthonormal 8x8 DCT, quality-scaled quantisation and reconstruction.

#include <array>

#include "tinv/feature_map.hpp"

namespace tinv {

struct QuantTables {
  std::array<int, 64> luma{};    // row-major 8x8
  std::array<int, 64> chroma{};
  int qf = 50;
};

/// Standard luminance/chrominance tables (quality 50).
const QuantTables& base_tables();

/// Quality scaling: s = qf < 50 ? 5000/qf : 200 - 2qf and
/// entry' = clamp(floor((entry * s + 50) / 100), 1, 255).
QuantTables scale_tables(const QuantTables& base, int qf);

/// Orthonormal 8x8 DCT-II basis, C(k, n).
const Eigen::Matrix<double, 8, 8>& dct8();

/// Degrades an RGB batch in [0, 1]. Sizes that are not multiples of 8 are
/// edge-padded for coding and cropped back. Output is clipped to [0, 1].
FeatureMap jpeg_degrade(const FeatureMap& x, int qf);

}  // namespace tinv
