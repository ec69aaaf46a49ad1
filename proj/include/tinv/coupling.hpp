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

// Invertible coupling blocks.
//
// VBlock is the dual-branch block (additive update on the low branch, affine
// update on the high branch). TBlock is the tri-branch block over luminance,
// chrominance and high-frequency branches. Both are exactly invertible for
// any parameter values; the affine log-scale passes through clamp_scale so
// exp() stays within (e^-bound, e^bound).

#include <random>
#include <string>
#include <vector>

#include "tinv/ops.hpp"

namespace tinv {

struct TransformInit {
  /// Multiplier on the Xavier-uniform bound for the hidden layers.
  double scale = 0.1;
  /// Zero the final convolution so a fresh function outputs zeros.
  bool zero_last = true;
};

/// Densely connected 3x3 convolution stack: layer l sees the input
/// concatenated with the outputs of every previous layer. Hidden layers use a
/// leaky rectifier; the final layer is linear.
class TransformFn {
 public:
  static constexpr Index kLayers = 5;
  static constexpr Index kKernel = 3;

  TransformFn() = default;
  TransformFn(std::string name, Index in_channels, Index out_channels,
              Index width, std::mt19937_64& rng, const TransformInit& init = {});

  FeatureMap operator()(const FeatureMap& x) const { return apply(x); }
  Var operator()(const Var& x) const { return apply(x); }

  Index in_channels() const { return in_; }
  Index out_channels() const { return out_; }
  Index width() const { return width_; }
  const std::string& name() const { return name_; }

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

  /// Closed-form number of learnable scalars.
  static Index parameter_count(Index in_channels, Index out_channels,
                               Index width);

 private:
  template <typename V>
  V apply(const V& x) const {
    if (x.channels() != in_) {
      throw StructuralError(name_ + ": expected " + std::to_string(in_) +
                            " input channels, got " +
                            std::to_string(x.channels()));
    }
    std::vector<V> features{x};
    for (Index l = 0; l + 1 < kLayers; ++l) {
      V h = conv2d(concat_channels(features), weights_[l], biases_[l]);
      features.push_back(leaky_relu(h));
    }
    return conv2d(concat_channels(features), weights_[kLayers - 1],
                  biases_[kLayers - 1]);
  }

  std::string name_;
  Index in_ = 0;
  Index out_ = 0;
  Index width_ = 0;
  std::vector<Parameter> weights_;
  std::vector<Parameter> biases_;
};

template <typename V>
struct DualStateT {
  V low;
  V high;
};
using DualState = DualStateT<FeatureMap>;

template <typename V>
struct TriStateT {
  V luma;
  V chroma;
  V high;
};
using TriState = TriStateT<FeatureMap>;

inline constexpr double kDefaultClampBound = 1.0;

/// x_l' = x_l + phi(x_h)
/// x_h' = x_h * exp(clamp(rho(x_l'))) + eta(x_l')
class VBlock {
 public:
  VBlock() = default;
  VBlock(const std::string& name, Index low_channels, Index high_channels,
         Index width, std::mt19937_64& rng, const TransformInit& init = {},
         double clamp_bound = kDefaultClampBound);

  template <typename V>
  DualStateT<V> forward(const DualStateT<V>& s) const {
    check(s);
    V low = add(s.low, phi(s.high));
    V high = add(mul(s.high, exp(clamp_scale(rho(low), bound_))), eta(low));
    require_finite(low, "VBlock forward");
    require_finite(high, "VBlock forward");
    return {low, high};
  }

  template <typename V>
  DualStateT<V> inverse(const DualStateT<V>& s) const {
    check(s);
    V high = mul(sub(s.high, eta(s.low)),
                 exp(neg(clamp_scale(rho(s.low), bound_))));
    V low = sub(s.low, phi(high));
    require_finite(low, "VBlock inverse");
    require_finite(high, "VBlock inverse");
    return {low, high};
  }

  Index low_channels() const { return phi.out_channels(); }
  Index high_channels() const { return phi.in_channels(); }
  double clamp_bound() const { return bound_; }

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

  TransformFn phi;  // high -> low
  TransformFn rho;  // low -> high (log-scale)
  TransformFn eta;  // low -> high (shift)

 private:
  template <typename V>
  void check(const DualStateT<V>& s) const {
    if (s.low.channels() != low_channels() ||
        s.high.channels() != high_channels()) {
      throw StructuralError("VBlock: expected (" +
                            std::to_string(low_channels()) + ", " +
                            std::to_string(high_channels()) +
                            ") channels, got (" +
                            std::to_string(s.low.channels()) + ", " +
                            std::to_string(s.high.channels()) + ")");
    }
  }

  double bound_ = kDefaultClampBound;
};

/// x_c' = x_c + phi(x_h) + theta(x_y)
/// x_y' = x_y + nu(x_c') + pi(x_h)
/// x_h' = x_h * exp(clamp(rho(x_c') + eps(x_y'))) + eta(x_c') + mu(x_y')
///
/// Updates run chroma -> luma -> high; the inverse recovers high -> luma ->
/// chroma.
class TBlock {
 public:
  TBlock() = default;
  TBlock(const std::string& name, Index luma_channels, Index chroma_channels,
         Index high_channels, Index width, std::mt19937_64& rng,
         const TransformInit& init = {},
         double clamp_bound = kDefaultClampBound);

  template <typename V>
  TriStateT<V> forward(const TriStateT<V>& s) const {
    check(s);
    V chroma = add(add(s.chroma, phi(s.high)), theta(s.luma));
    V luma = add(add(s.luma, nu(chroma)), pi(s.high));
    V log_scale = clamp_scale(add(rho(chroma), eps(luma)), bound_);
    V high = add(add(mul(s.high, exp(log_scale)), eta(chroma)), mu(luma));
    require_finite(chroma, "TBlock forward");
    require_finite(luma, "TBlock forward");
    require_finite(high, "TBlock forward");
    return {luma, chroma, high};
  }

  template <typename V>
  TriStateT<V> inverse(const TriStateT<V>& s) const {
    check(s);
    V log_scale = clamp_scale(add(rho(s.chroma), eps(s.luma)), bound_);
    V high = mul(sub(sub(s.high, eta(s.chroma)), mu(s.luma)),
                 exp(neg(log_scale)));
    V luma = sub(sub(s.luma, nu(s.chroma)), pi(high));
    V chroma = sub(sub(s.chroma, phi(high)), theta(luma));
    require_finite(chroma, "TBlock inverse");
    require_finite(luma, "TBlock inverse");
    require_finite(high, "TBlock inverse");
    return {luma, chroma, high};
  }

  Index luma_channels() const { return nu.out_channels(); }
  Index chroma_channels() const { return phi.out_channels(); }
  Index high_channels() const { return phi.in_channels(); }
  double clamp_bound() const { return bound_; }

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

  TransformFn phi;    // high -> chroma
  TransformFn theta;  // luma -> chroma
  TransformFn nu;     // chroma -> luma
  TransformFn pi;     // high -> luma
  TransformFn rho;    // chroma -> high (log-scale)
  TransformFn eps;    // luma -> high (log-scale)
  TransformFn eta;    // chroma -> high (shift)
  TransformFn mu;     // luma -> high (shift)

 private:
  template <typename V>
  void check(const TriStateT<V>& s) const {
    if (s.luma.channels() != luma_channels() ||
        s.chroma.channels() != chroma_channels() ||
        s.high.channels() != high_channels()) {
      throw StructuralError(
          "TBlock: expected (" + std::to_string(luma_channels()) + ", " +
          std::to_string(chroma_channels()) + ", " +
          std::to_string(high_channels()) + ") channels, got (" +
          std::to_string(s.luma.channels()) + ", " +
          std::to_string(s.chroma.channels()) + ", " +
          std::to_string(s.high.channels()) + ")");
    }
  }

  double bound_ = kDefaultClampBound;
};

}  // namespace tinv
