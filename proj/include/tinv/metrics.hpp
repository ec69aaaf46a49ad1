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

// Full-range quality metrics on [0, 1] RGB batches. Batches are scored as a
// whole: PSNR pools the squared error, SSIM averages all valid windows.

#include "tinv/feature_map.hpp"

namespace tinv {

struct SsimOptions {
  Index window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// 10 log10(1 / mse) for unit peak; +inf when mse is zero.
double psnr_from_mse(double mse);

/// PSNR on the full-range luma channel.
double psnr_y(const FeatureMap& a, const FeatureMap& b);
/// PSNR over all RGB samples jointly.
double psnr_rgb(const FeatureMap& a, const FeatureMap& b);
/// Gaussian-window SSIM on luma, averaged over windows lying fully inside
/// the image.
double ssim_y(const FeatureMap& a, const FeatureMap& b, const SsimOptions& opt = {});

/// SSIM of two single-channel maps (any batch size).
double ssim_plane(const FeatureMap& a, const FeatureMap& b, const SsimOptions& opt = {});

}  // namespace tinv
