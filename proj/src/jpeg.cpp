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

#include "tinv/jpeg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace tinv {

namespace {

using Mat8 = Eigen::Matrix<double, 8, 8>;
using Mat3 = Eigen::Matrix3d;

// JFIF full-range conversion on the 0..255 scale. The +128 chroma offset and
// the -128 level shift cancel, so blocks are coded from zero-centred planes.
Mat3 jfif_forward() {
  Mat3 m;
  m << 0.299, 0.587, 0.114,          //
      -0.168736, -0.331264, 0.5,     //
      0.5, -0.418688, -0.081312;
  return m;
}

void check_qf(int qf) {
  if (qf < 1 || qf > 100) {
    throw UsageError("JPEG quality must be in 1..100, got " + std::to_string(qf));
  }
}

}  // namespace

const QuantTables& base_tables() {
  static const QuantTables tables{
      {16, 11, 10, 16, 24,  40,  51,  61,   //
       12, 12, 14, 19, 26,  58,  60,  55,   //
       14, 13, 16, 24, 40,  57,  69,  56,   //
       14, 17, 22, 29, 51,  87,  80,  62,   //
       18, 22, 37, 56, 68,  109, 103, 77,   //
       24, 35, 55, 64, 81,  104, 113, 92,   //
       49, 64, 78, 87, 103, 121, 120, 101,  //
       72, 92, 95, 98, 112, 100, 103, 99},
      {17, 18, 24, 47, 99, 99, 99, 99,  //
       18, 21, 26, 66, 99, 99, 99, 99,  //
       24, 26, 56, 99, 99, 99, 99, 99,  //
       47, 66, 99, 99, 99, 99, 99, 99,  //
       99, 99, 99, 99, 99, 99, 99, 99,  //
       99, 99, 99, 99, 99, 99, 99, 99,  //
       99, 99, 99, 99, 99, 99, 99, 99,  //
       99, 99, 99, 99, 99, 99, 99, 99},
      50};
  return tables;
}

QuantTables scale_tables(const QuantTables& base, int qf) {
  check_qf(qf);
  const long s = qf < 50 ? 5000 / qf : 200 - 2 * qf;
  auto scale = [s](int e) {
    return static_cast<int>(std::clamp<long>((e * s + 50) / 100, 1, 255));
  };
  QuantTables out;
  out.qf = qf;
  std::transform(base.luma.begin(), base.luma.end(), out.luma.begin(), scale);
  std::transform(base.chroma.begin(), base.chroma.end(), out.chroma.begin(),
                 scale);
  return out;
}

const Mat8& dct8() {
  static const Mat8 c = [] {
    Mat8 m;
    for (int k = 0; k < 8; ++k) {
      const double a = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int n = 0; n < 8; ++n) {
        m(k, n) = a * std::cos(std::numbers::pi * (2 * n + 1) * k / 16.0);
      }
    }
    return m;
  }();
  return c;
}

FeatureMap jpeg_degrade(const FeatureMap& x, int qf) {
  check_qf(qf);
  if (x.channels() != 3) {
    throw StructuralError("jpeg_degrade: expected 3 channels, got " +
                          std::to_string(x.channels()));
  }
  const QuantTables q = scale_tables(base_tables(), qf);
  const Mat3 fwd = jfif_forward();
  const Mat3 inv = fwd.inverse();
  const Mat8& c = dct8();

  const Index h = x.height(), w = x.width();
  const Index ph = (h + 7) / 8 * 8, pw = (w + 7) / 8 * 8;
  FeatureMap out(x.shape());
  std::array<Eigen::MatrixXd, 3> plane;
  for (Index n = 0; n < x.n(); ++n) {
    for (auto& p : plane) p.resize(ph, pw);
    for (Index yy = 0; yy < ph; ++yy) {
      const Index sy = std::min(yy, h - 1);
      for (Index xx = 0; xx < pw; ++xx) {
        const Index sx = std::min(xx, w - 1);
        const Eigen::Vector3d rgb(x(n, 0, sy, sx), x(n, 1, sy, sx),
                                  x(n, 2, sy, sx));
        const Eigen::Vector3d ycc = fwd * (255.0 * rgb);
        plane[0](yy, xx) = ycc[0] - 128.0;
        plane[1](yy, xx) = ycc[1];
        plane[2](yy, xx) = ycc[2];
      }
    }
    for (int ch = 0; ch < 3; ++ch) {
      const auto& table = ch == 0 ? q.luma : q.chroma;
      for (Index by = 0; by < ph; by += 8) {
        for (Index bx = 0; bx < pw; bx += 8) {
          auto block = plane[ch].block<8, 8>(by, bx);
          Mat8 coef = c * block * c.transpose();
          for (int i = 0; i < 8; ++i) {
            for (int j = 0; j < 8; ++j) {
              const double step = table[static_cast<std::size_t>(i * 8 + j)];
              coef(i, j) = std::round(coef(i, j) / step) * step;
            }
          }
          block = c.transpose() * coef * c;
        }
      }
    }
    for (Index yy = 0; yy < h; ++yy) {
      for (Index xx = 0; xx < w; ++xx) {
        const Eigen::Vector3d ycc(plane[0](yy, xx) + 128.0, plane[1](yy, xx),
                                  plane[2](yy, xx));
        const Eigen::Vector3d rgb = inv * ycc / 255.0;
        for (int ch = 0; ch < 3; ++ch) {
          out(n, ch, yy, xx) = std::clamp(rgb[ch], 0.0, 1.0);
        }
      }
    }
  }
  return out;
}

}  // namespace tinv
