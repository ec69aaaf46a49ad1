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

#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "tinv/imageops.hpp"
#include "tinv/metrics.hpp"

using namespace tinv;
using test::random_map;

namespace {

// Window-by-window SSIM with an explicit 2-D Gaussian.
double ssim_oracle(const FeatureMap& a, const FeatureMap& b) {
  double w[11][11], total = 0;
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) total += w[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / 4.5);
  const double c1 = 1e-4, c2 = 9e-4;
  double acc = 0;
  int count = 0;
  for (Index n = 0; n < a.n(); ++n)
    for (Index y = 0; y + 11 <= a.height(); ++y)
      for (Index x = 0; x + 11 <= a.width(); ++x) {
        double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
        for (int i = 0; i < 11; ++i)
          for (int j = 0; j < 11; ++j) {
            const double k = w[i][j] / total, p = a(n, 0, y + i, x + j), q = b(n, 0, y + i, x + j);
            mx += k * p;
            my += k * q;
          }
        for (int i = 0; i < 11; ++i)
          for (int j = 0; j < 11; ++j) {
            const double k = w[i][j] / total, p = a(n, 0, y + i, x + j) - mx,
                         q = b(n, 0, y + i, x + j) - my;
            sxx += k * p * p;
            syy += k * q * q;
            sxy += k * p * q;
          }
        acc += ((2 * mx * my + c1) * (2 * sxy + c2)) / ((mx * mx + my * my + c1) * (sxx + syy + c2));
        ++count;
      }
  return acc / count;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("psnr values") {
    CHECK(psnr_from_mse(0.01) == doctest::Approx(20.0));
    CHECK(psnr_from_mse(1.0) == 0.0);
    CHECK(std::isinf(psnr_from_mse(0.0)));

    const FeatureMap a = random_map({2, 3, 8, 8}, 1, 0, 1);
    CHECK(std::isinf(psnr_y(a, a)));
    CHECK(std::isinf(psnr_rgb(a, a)));
    FeatureMap b = a;
    b.array() += 0.1;
    CHECK(psnr_y(a, b) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(psnr_rgb(a, b) == doctest::Approx(20.0).epsilon(1e-12));

    // Luma weights: an all-red difference is 0.299 in Y.
    FeatureMap red({1, 3, 4, 4});
    red.plane(0, 0).setConstant(1.0);
    const FeatureMap black({1, 3, 4, 4});
    CHECK(psnr_y(red, black) == doctest::Approx(-20 * std::log10(0.299)).epsilon(1e-12));
    CHECK(psnr_rgb(red, black) == doctest::Approx(10 * std::log10(3.0)).epsilon(1e-12));

    CHECK_THROWS_AS(psnr_y(a, FeatureMap({2, 3, 8, 4})), StructuralError);
    CHECK_THROWS_AS(psnr_rgb(FeatureMap({1, 1, 4, 4}), FeatureMap({1, 1, 4, 4})), StructuralError);
  }

  TEST_CASE("ssim matches a direct window oracle") {
    const FeatureMap a = random_map({2, 1, 16, 19}, 2, 0, 1);
    FeatureMap b = a;
    b.array() = (0.7 * a.array() + 0.3 * random_map(a.shape(), 3, 0, 1).array());
    CHECK(ssim_plane(a, b) == doctest::Approx(ssim_oracle(a, b)).epsilon(1e-12));
    CHECK(ssim_plane(a, b) == doctest::Approx(ssim_plane(b, a)).epsilon(1e-14));
    CHECK(ssim_plane(a, b) < 1.0);
    CHECK(ssim_plane(a, a) == doctest::Approx(1.0).epsilon(1e-14));

    const FeatureMap x = random_map({1, 3, 12, 12}, 4, 0, 1);
    const FeatureMap y = random_map({1, 3, 12, 12}, 5, 0, 1);
    CHECK(ssim_y(x, y) == doctest::Approx(ssim_oracle(luma(x), luma(y))).epsilon(1e-12));
    CHECK(ssim_y(x, x) == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("ssim sees luminance shifts") {
    const FeatureMap a = FeatureMap::constant({1, 1, 11, 11}, 0.2);
    const FeatureMap b = FeatureMap::constant({1, 1, 11, 11}, 0.6);
    // Flat patches: only the luminance term differs from one.
    const double expect = (2 * 0.2 * 0.6 + 1e-4) / (0.04 + 0.36 + 1e-4);
    CHECK(ssim_plane(a, b) == doctest::Approx(expect).epsilon(1e-12));
  }

  TEST_CASE("ssim needs a full window") {
    CHECK_THROWS_AS(ssim_y(FeatureMap({1, 3, 10, 20}), FeatureMap({1, 3, 10, 20})), UsageError);
    SsimOptions small;
    small.window = 3;
    CHECK_NOTHROW(ssim_plane(FeatureMap({1, 1, 4, 4}, 0.5), FeatureMap({1, 1, 4, 4}, 0.5), small));
  }
}
