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

// Invertible and reference image transforms over NCHW maps: Haar analysis and
// synthesis, RGB <-> YCbCr, bicubic resampling and 8-bit quantization.
//
// Everything here is a pure function templated on the scalar type. The
// *_adjoint helpers are the transposed linear maps used by the tape.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "tinv/feature_map.hpp"

namespace tinv {

/// One LL subband per source channel plus three detail subbands (HL, LH, HH)
/// per source channel, interleaved as channel 3*c + {0, 1, 2}.
template <typename Scalar>
struct SubbandStackT {
  FeatureMapT<Scalar> ll;
  FeatureMapT<Scalar> details;
};
using SubbandStack = SubbandStackT<double>;

template <typename Scalar>
SubbandStackT<Scalar> haar_forward(const FeatureMapT<Scalar>& x) {
  const Shape& s = x.shape();
  if (s.h % 2 != 0 || s.w % 2 != 0) {
    throw StructuralError("haar_forward: height and width must be even, got " +
                          to_string(s));
  }
  const Index h2 = s.h / 2;
  const Index w2 = s.w / 2;
  SubbandStackT<Scalar> out{FeatureMapT<Scalar>({s.n, s.c, h2, w2}),
                            FeatureMapT<Scalar>({s.n, 3 * s.c, h2, w2})};
  const Scalar q = Scalar(0.25);
  for (Index n = 0; n < s.n; ++n) {
    for (Index c = 0; c < s.c; ++c) {
      for (Index y = 0; y < h2; ++y) {
        for (Index xx = 0; xx < w2; ++xx) {
          const Scalar a = x(n, c, 2 * y, 2 * xx);
          const Scalar b = x(n, c, 2 * y, 2 * xx + 1);
          const Scalar cc = x(n, c, 2 * y + 1, 2 * xx);
          const Scalar d = x(n, c, 2 * y + 1, 2 * xx + 1);
          out.ll(n, c, y, xx) = (a + b + cc + d) * q;
          out.details(n, 3 * c + 0, y, xx) = (a - b + cc - d) * q;
          out.details(n, 3 * c + 1, y, xx) = (a + b - cc - d) * q;
          out.details(n, 3 * c + 2, y, xx) = (a - b - cc + d) * q;
        }
      }
    }
  }
  return out;
}

template <typename Scalar>
FeatureMapT<Scalar> haar_inverse(const FeatureMapT<Scalar>& ll,
                                 const FeatureMapT<Scalar>& details) {
  const Shape& s = ll.shape();
  if (details.channels() % 3 != 0 || details.channels() != 3 * s.c ||
      details.n() != s.n || details.height() != s.h ||
      details.width() != s.w) {
    throw StructuralError(
        "haar_inverse: expected details with 3x the LL channels at the same "
        "resolution, got LL " +
        to_string(s) + " and details " + to_string(details.shape()));
  }
  FeatureMapT<Scalar> x({s.n, s.c, 2 * s.h, 2 * s.w});
  for (Index n = 0; n < s.n; ++n) {
    for (Index c = 0; c < s.c; ++c) {
      for (Index y = 0; y < s.h; ++y) {
        for (Index xx = 0; xx < s.w; ++xx) {
          const Scalar l = ll(n, c, y, xx);
          const Scalar hl = details(n, 3 * c + 0, y, xx);
          const Scalar lh = details(n, 3 * c + 1, y, xx);
          const Scalar hh = details(n, 3 * c + 2, y, xx);
          x(n, c, 2 * y, 2 * xx) = l + hl + lh + hh;
          x(n, c, 2 * y, 2 * xx + 1) = l - hl + lh - hh;
          x(n, c, 2 * y + 1, 2 * xx) = l + hl - lh - hh;
          x(n, c, 2 * y + 1, 2 * xx + 1) = l - hl - lh + hh;
        }
      }
    }
  }
  return x;
}

template <typename Scalar>
FeatureMapT<Scalar> haar_inverse(const SubbandStackT<Scalar>& s) {
  return haar_inverse(s.ll, s.details);
}

/// Inverse from a channel-stacked [LL | details] map of 4C channels.
template <typename Scalar>
FeatureMapT<Scalar> haar_inverse_stacked(const FeatureMapT<Scalar>& stacked) {
  if (stacked.channels() % 4 != 0) {
    throw StructuralError(
        "haar_inverse: stacked channel count must be divisible by 4, got " +
        std::to_string(stacked.channels()));
  }
  const Index c = stacked.channels() / 4;
  return haar_inverse(slice_channels(stacked, 0, c),
                      slice_channels(stacked, c, 3 * c));
}

// The analysis matrix is H/4 with H the symmetric 4x4 Hadamard matrix, so the
// transpose of analysis is synthesis/4 and the transpose of synthesis is
// 4 * analysis.
template <typename Scalar>
FeatureMapT<Scalar> haar_forward_adjoint(const FeatureMapT<Scalar>& g_ll,
                                         const FeatureMapT<Scalar>& g_details) {
  FeatureMapT<Scalar> g = haar_inverse(g_ll, g_details);
  g.array() *= Scalar(0.25);
  return g;
}

template <typename Scalar>
SubbandStackT<Scalar> haar_inverse_adjoint(const FeatureMapT<Scalar>& g_x) {
  SubbandStackT<Scalar> s = haar_forward(g_x);
  s.ll.array() *= Scalar(4);
  s.details.array() *= Scalar(4);
  return s;
}

/// Each pixel of y repeated over a 2x2 block: synthesis with zero details.
template <typename Scalar>
FeatureMapT<Scalar> block_expand(const FeatureMapT<Scalar>& y) {
  Shape s = y.shape();
  s.c *= 3;
  return haar_inverse(y, FeatureMapT<Scalar>(s));
}

// --- colour ---------------------------------------------------------------

namespace color {

inline constexpr double kR = 0.299;
inline constexpr double kG = 0.587;
inline constexpr double kB = 0.114;
inline constexpr double kCb = 0.564;
inline constexpr double kCr = 0.713;

/// Rows map (R, G, B) to (Y, Cb, Cr); chroma is zero-centred.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> rgb_to_ycbcr_matrix() {
  Eigen::Matrix<Scalar, 3, 3> m;
  m << kR, kG, kB,                                  //
      -kCb * kR, -kCb * kG, kCb * (1.0 - kB),       //
      kCr * (1.0 - kR), -kCr * kG, -kCr * kB;
  return m;
}

/// Closed-form inverse of rgb_to_ycbcr_matrix().
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> ycbcr_to_rgb_matrix() {
  Eigen::Matrix<Scalar, 3, 3> m;
  m << 1.0, 0.0, 1.0 / kCr,                                   //
      1.0, -kB / (kG * kCb), -kR / (kG * kCr),                //
      1.0, 1.0 / kCb, 0.0;
  return m;
}

}  // namespace color

/// Applies a 3x3 channel-mixing matrix pixelwise to a 3-channel map.
template <typename Scalar>
FeatureMapT<Scalar> mix_channels(const FeatureMapT<Scalar>& x,
                                 const Eigen::Matrix<Scalar, 3, 3>& m) {
  if (x.channels() != 3) {
    throw StructuralError("colour transform needs 3 channels, got " +
                          std::to_string(x.channels()));
  }
  FeatureMapT<Scalar> out(x.shape());
  const Index p = x.shape().plane();
  for (Index n = 0; n < x.n(); ++n) {
    const Scalar* src = x.data() + x.offset(n, 0, 0, 0);
    Scalar* dst = out.data() + out.offset(n, 0, 0, 0);
    for (Index i = 0; i < p; ++i) {
      const Scalar a = src[i], b = src[p + i], c = src[2 * p + i];
      dst[i] = m(0, 0) * a + m(0, 1) * b + m(0, 2) * c;
      dst[p + i] = m(1, 0) * a + m(1, 1) * b + m(1, 2) * c;
      dst[2 * p + i] = m(2, 0) * a + m(2, 1) * b + m(2, 2) * c;
    }
  }
  return out;
}

/// Luminance (1 channel) and chrominance (Cb, Cr).
template <typename Scalar>
struct LumaChromaT {
  FeatureMapT<Scalar> y;
  FeatureMapT<Scalar> c;
};

template <typename Scalar>
LumaChromaT<Scalar> rgb_to_ycbcr(const FeatureMapT<Scalar>& rgb) {
  FeatureMapT<Scalar> ycc = mix_channels(rgb, color::rgb_to_ycbcr_matrix<Scalar>());
  return {slice_channels(ycc, 0, 1), slice_channels(ycc, 1, 2)};
}

template <typename Scalar>
FeatureMapT<Scalar> ycbcr_to_rgb(const FeatureMapT<Scalar>& y,
                                 const FeatureMapT<Scalar>& c) {
  if (y.channels() != 1 || c.channels() != 2) {
    throw StructuralError("ycbcr_to_rgb: expected 1 luma and 2 chroma channels");
  }
  return mix_channels(concat_channels(y, c),
                      color::ycbcr_to_rgb_matrix<Scalar>());
}

/// Full-range luma of a 3-channel map.
template <typename Scalar>
FeatureMapT<Scalar> luma(const FeatureMapT<Scalar>& rgb) {
  if (rgb.channels() != 3) {
    throw StructuralError("luma needs 3 channels, got " +
                          std::to_string(rgb.channels()));
  }
  const Shape& s = rgb.shape();
  FeatureMapT<Scalar> y({s.n, 1, s.h, s.w});
  const Index p = s.plane();
  for (Index n = 0; n < s.n; ++n) {
    const Scalar* src = rgb.data() + rgb.offset(n, 0, 0, 0);
    Scalar* dst = y.data() + y.offset(n, 0, 0, 0);
    for (Index i = 0; i < p; ++i) {
      dst[i] = Scalar(color::kR) * src[i] + Scalar(color::kG) * src[p + i] +
               Scalar(color::kB) * src[2 * p + i];
    }
  }
  return y;
}

// --- space-to-depth ---------------------------------------------------------

/// (n, c, h, w) -> (n, c*r*r, h/r, w/r); output channel c*r*r + dy*r + dx.
template <typename Scalar>
FeatureMapT<Scalar> pixel_unshuffle(const FeatureMapT<Scalar>& x, Index r) {
  const Shape& s = x.shape();
  if (r <= 0 || s.h % r != 0 || s.w % r != 0) {
    throw StructuralError("pixel_unshuffle: " + to_string(s) +
                          " not divisible by " + std::to_string(r));
  }
  FeatureMapT<Scalar> out({s.n, s.c * r * r, s.h / r, s.w / r});
  for (Index n = 0; n < s.n; ++n)
    for (Index c = 0; c < s.c; ++c)
      for (Index y = 0; y < s.h; ++y)
        for (Index xx = 0; xx < s.w; ++xx)
          out(n, c * r * r + (y % r) * r + (xx % r), y / r, xx / r) =
              x(n, c, y, xx);
  return out;
}

template <typename Scalar>
FeatureMapT<Scalar> pixel_shuffle(const FeatureMapT<Scalar>& x, Index r) {
  const Shape& s = x.shape();
  if (r <= 0 || s.c % (r * r) != 0) {
    throw StructuralError("pixel_shuffle: channels " + std::to_string(s.c) +
                          " not divisible by " + std::to_string(r * r));
  }
  const Index c_out = s.c / (r * r);
  FeatureMapT<Scalar> out({s.n, c_out, s.h * r, s.w * r});
  for (Index n = 0; n < s.n; ++n)
    for (Index c = 0; c < c_out; ++c)
      for (Index y = 0; y < s.h * r; ++y)
        for (Index xx = 0; xx < s.w * r; ++xx)
          out(n, c, y, xx) = x(n, c * r * r + (y % r) * r + (xx % r), y / r,
                               xx / r);
  return out;
}

// --- resampling -------------------------------------------------------------

/// Keys cubic convolution kernel with a = -0.5.
inline double cubic_kernel(double x) {
  constexpr double a = -0.5;
  const double ax = std::abs(x);
  const double ax2 = ax * ax;
  const double ax3 = ax2 * ax;
  if (ax <= 1.0) return (a + 2.0) * ax3 - (a + 3.0) * ax2 + 1.0;
  if (ax < 2.0) return a * ax3 - 5.0 * a * ax2 + 8.0 * a * ax - 4.0 * a;
  return 0.0;
}

namespace detail {

struct ResampleTaps {
  Index first = 0;
  std::vector<double> weights;  // taps for source first + k, edge-clamped
};

inline std::vector<ResampleTaps> resample_taps(Index out_size,
                                               double scale) {
  const bool antialias = scale < 1.0;
  const double kernel_width = antialias ? 4.0 / scale : 4.0;
  const Index taps = static_cast<Index>(std::ceil(kernel_width)) + 2;
  std::vector<ResampleTaps> table(static_cast<std::size_t>(out_size));
  for (Index i = 0; i < out_size; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / scale - 0.5;
    const Index left = static_cast<Index>(std::floor(u - kernel_width / 2.0));
    ResampleTaps& t = table[static_cast<std::size_t>(i)];
    t.first = left;
    t.weights.resize(static_cast<std::size_t>(taps));
    double sum = 0.0;
    for (Index k = 0; k < taps; ++k) {
      const double dist = u - static_cast<double>(left + k);
      const double wgt =
          antialias ? scale * cubic_kernel(scale * dist) : cubic_kernel(dist);
      t.weights[static_cast<std::size_t>(k)] = wgt;
      sum += wgt;
    }
    for (double& wgt : t.weights) wgt /= sum;
  }
  return table;
}

}  // namespace detail

inline bool is_supported_resize_scale(double scale) {
  return scale == 0.25 || scale == 0.5 || scale == 1.0 || scale == 2.0 ||
         scale == 4.0;
}

/// Separable bicubic resize. Downscaling widens the kernel by 1/scale
/// (antialiasing); borders replicate the edge sample.
template <typename Scalar>
FeatureMapT<Scalar> bicubic_resize(const FeatureMapT<Scalar>& x, double scale) {
  if (!is_supported_resize_scale(scale)) {
    throw UsageError("bicubic_resize: unsupported scale " +
                     std::to_string(scale) + " (use 1/4, 1/2, 1, 2 or 4)");
  }
  const Shape& s = x.shape();
  const double oh = static_cast<double>(s.h) * scale;
  const double ow = static_cast<double>(s.w) * scale;
  if (oh != std::floor(oh) || ow != std::floor(ow)) {
    throw StructuralError("bicubic_resize: " + to_string(s) +
                          " is not divisible by the scale factor");
  }
  const Index out_h = static_cast<Index>(oh);
  const Index out_w = static_cast<Index>(ow);
  const auto rows = detail::resample_taps(out_h, scale);
  const auto cols = detail::resample_taps(out_w, scale);
  auto clamp_index = [](Index i, Index n) {
    return std::clamp<Index>(i, 0, n - 1);
  };

  FeatureMapT<Scalar> out({s.n, s.c, out_h, out_w});
  std::vector<double> tmp(static_cast<std::size_t>(s.h * out_w));
  for (Index n = 0; n < s.n; ++n) {
    for (Index c = 0; c < s.c; ++c) {
      // horizontal pass
      for (Index y = 0; y < s.h; ++y) {
        for (Index xo = 0; xo < out_w; ++xo) {
          const auto& t = cols[static_cast<std::size_t>(xo)];
          double acc = 0.0;
          for (std::size_t k = 0; k < t.weights.size(); ++k) {
            const Index xi = clamp_index(t.first + static_cast<Index>(k), s.w);
            acc += t.weights[k] * static_cast<double>(x(n, c, y, xi));
          }
          tmp[static_cast<std::size_t>(y * out_w + xo)] = acc;
        }
      }
      // vertical pass
      for (Index yo = 0; yo < out_h; ++yo) {
        const auto& t = rows[static_cast<std::size_t>(yo)];
        for (Index xo = 0; xo < out_w; ++xo) {
          double acc = 0.0;
          for (std::size_t k = 0; k < t.weights.size(); ++k) {
            const Index yi = clamp_index(t.first + static_cast<Index>(k), s.h);
            acc += t.weights[k] * tmp[static_cast<std::size_t>(yi * out_w + xo)];
          }
          out(n, c, yo, xo) = static_cast<Scalar>(acc);
        }
      }
    }
  }
  return out;
}

// --- quantization -----------------------------------------------------------

template <typename Scalar>
FeatureMapT<Scalar> clip01(const FeatureMapT<Scalar>& x) {
  return FeatureMapT<Scalar>(x.shape(),
                             x.array().max(Scalar(0)).min(Scalar(1)).eval());
}

/// Clip to [0, 1] and snap to the nearest multiple of 1/255.
template <typename Scalar>
FeatureMapT<Scalar> quantize8(const FeatureMapT<Scalar>& x) {
  typename FeatureMapT<Scalar>::Array a =
      x.array().max(Scalar(0)).min(Scalar(1));
  for (Index i = 0; i < a.size(); ++i) {
    a[i] = std::round(a[i] * Scalar(255)) / Scalar(255);
  }
  return FeatureMapT<Scalar>(x.shape(), std::move(a));
}

}  // namespace tinv
