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

#include "tinv/metrics.hpp"

#include <cmath>
#include <limits>

#include "tinv/imageops.hpp"

namespace tinv {

namespace {

double mse(const FeatureMap& a, const FeatureMap& b) {
  return (a.array() - b.array()).square().mean();
}

std::vector<double> gaussian_window(const SsimOptions& opt) {
  std::vector<double> g(static_cast<std::size_t>(opt.window));
  const double centre = static_cast<double>(opt.window - 1) / 2.0;
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = static_cast<double>(i) - centre;
    g[i] = std::exp(-d * d / (2.0 * opt.sigma * opt.sigma));
    total += g[i];
  }
  for (double& v : g) v /= total;
  return g;
}

// Separable "valid" filtering of one plane.
Eigen::ArrayXXd filter_valid(const Eigen::ArrayXXd& p, const std::vector<double>& g) {
  const Index k = static_cast<Index>(g.size());
  const Index oh = p.rows() - k + 1, ow = p.cols() - k + 1;
  Eigen::ArrayXXd rows = Eigen::ArrayXXd::Zero(p.rows(), ow);
  for (Index t = 0; t < k; ++t) rows += g[static_cast<std::size_t>(t)] * p.middleCols(t, ow);
  Eigen::ArrayXXd out = Eigen::ArrayXXd::Zero(oh, ow);
  for (Index t = 0; t < k; ++t) out += g[static_cast<std::size_t>(t)] * rows.middleRows(t, oh);
  return out;
}

}  // namespace

double psnr_from_mse(double m) {
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / m);
}

double psnr_y(const FeatureMap& a, const FeatureMap& b) {
  require_same_shape(a, b, "psnr_y");
  return psnr_from_mse(mse(luma(a), luma(b)));
}

double psnr_rgb(const FeatureMap& a, const FeatureMap& b) {
  require_same_shape(a, b, "psnr_rgb");
  if (a.channels() != 3) {
    throw StructuralError("psnr_rgb needs 3 channels, got " +
                          std::to_string(a.channels()));
  }
  return psnr_from_mse(mse(a, b));
}

double ssim_plane(const FeatureMap& a, const FeatureMap& b, const SsimOptions& opt) {
  require_same_shape(a, b, "ssim");
  if (a.height() < opt.window || a.width() < opt.window) {
    throw UsageError("ssim: image " + to_string(a.shape()) +
                     " is smaller than the " + std::to_string(opt.window) +
                     "-pixel window");
  }
  const auto g = gaussian_window(opt);
  const double c1 = opt.k1 * opt.k1, c2 = opt.k2 * opt.k2;
  double total = 0.0;
  Index count = 0;
  for (Index n = 0; n < a.n(); ++n) {
    for (Index c = 0; c < a.channels(); ++c) {
      const Eigen::ArrayXXd x = a.plane(n, c).array();
      const Eigen::ArrayXXd y = b.plane(n, c).array();
      const Eigen::ArrayXXd mx = filter_valid(x, g), my = filter_valid(y, g);
      const Eigen::ArrayXXd sxx = filter_valid(x * x, g) - mx * mx;
      const Eigen::ArrayXXd syy = filter_valid(y * y, g) - my * my;
      const Eigen::ArrayXXd sxy = filter_valid(x * y, g) - mx * my;
      const Eigen::ArrayXXd map = ((2.0 * mx * my + c1) * (2.0 * sxy + c2)) /
                                  ((mx * mx + my * my + c1) * (sxx + syy + c2));
      total += map.sum();
      count += map.size();
    }
  }
  return total / static_cast<double>(count);
}

double ssim_y(const FeatureMap& a, const FeatureMap& b, const SsimOptions& opt) {
  require_same_shape(a, b, "ssim_y");
  return ssim_plane(luma(a), luma(b), opt);
}

}  // namespace tinv
