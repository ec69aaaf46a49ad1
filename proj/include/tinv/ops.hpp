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

// Differentiable operations. Every operation has an eager overload on
// FeatureMap and a traced overload on Var with identical semantics, so model
// code can be written once as a template over the value type.

#include <utility>
#include <vector>

#include "tinv/feature_map.hpp"
#include "tinv/imageops.hpp"
#include "tinv/tape.hpp"

namespace tinv {

inline constexpr double kLeakySlope = 0.2;

// --- eager ------------------------------------------------------------------

FeatureMap add(const FeatureMap& a, const FeatureMap& b);
FeatureMap sub(const FeatureMap& a, const FeatureMap& b);
FeatureMap mul(const FeatureMap& a, const FeatureMap& b);
FeatureMap neg(const FeatureMap& a);
FeatureMap exp(const FeatureMap& a);
FeatureMap scale(const FeatureMap& a, double s);
FeatureMap leaky_relu(const FeatureMap& x, double slope = kLeakySlope);
/// bound * (2 * sigmoid(raw) - 1), i.e. bound * tanh(raw / 2).
FeatureMap clamp_scale(const FeatureMap& raw, double bound = 1.0);

/// Same-padded 2-D convolution. kernel: (out, in, k, k) with odd k;
/// bias: (1, out, 1, 1).
FeatureMap conv2d(const FeatureMap& x, const FeatureMap& kernel,
                  const FeatureMap& bias);
FeatureMap conv2d(const FeatureMap& x, const Parameter& kernel,
                  const Parameter& bias);

struct Conv2dGrads {
  FeatureMap input;
  FeatureMap kernel;
  FeatureMap bias;
};
Conv2dGrads conv2d_backward(const FeatureMap& x, const FeatureMap& kernel,
                            const FeatureMap& grad_out);

FeatureMap concat_channels(const std::vector<FeatureMap>& parts);
FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b);

FeatureMap sum(const FeatureMap& x);
FeatureMap mean(const FeatureMap& x);
FeatureMap mse(const FeatureMap& x, const FeatureMap& target);
FeatureMap l1(const FeatureMap& x, const FeatureMap& target);

/// A constant of the given shape in the same evaluation context as `like`.
inline FeatureMap constant_like(const FeatureMap&, FeatureMap value) {
  return value;
}
inline const FeatureMap& value_of(const FeatureMap& x) { return x; }

/// Throws NumericError naming `what` if any entry is NaN/Inf.
void require_finite(const FeatureMap& x, const char* what);

// --- traced -----------------------------------------------------------------

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var neg(const Var& a);
Var exp(const Var& a);
Var scale(const Var& a, double s);
Var leaky_relu(const Var& x, double slope = kLeakySlope);
Var clamp_scale(const Var& raw, double bound = 1.0);
Var conv2d(const Var& x, const Parameter& kernel, const Parameter& bias);
Var conv2d(const Var& x, const Var& kernel, const Var& bias);
Var concat_channels(const std::vector<Var>& parts);
Var concat_channels(const Var& a, const Var& b);
Var slice_channels(const Var& x, Index begin, Index count);
Var sum(const Var& x);
Var mean(const Var& x);
Var abs(const Var& x);
Var square(const Var& x);
Var mse(const Var& x, const FeatureMap& target);
Var l1(const Var& x, const FeatureMap& target);

struct SubbandVars {
  Var ll;
  Var details;
};
SubbandVars haar_forward(const Var& x);
Var haar_inverse(const Var& ll, const Var& details);

struct LumaChromaVars {
  Var y;
  Var c;
};
LumaChromaVars rgb_to_ycbcr(const Var& rgb);
Var ycbcr_to_rgb(const Var& y, const Var& c);

Var pixel_unshuffle(const Var& x, Index r);
Var pixel_shuffle(const Var& x, Index r);

inline Var constant_like(const Var& like, FeatureMap value) {
  return like.tape().constant(std::move(value));
}
inline const FeatureMap& value_of(const Var& x) { return x.value(); }
inline void require_finite(const Var& x, const char* what) {
  require_finite(x.value(), what);
}

}  // namespace tinv
