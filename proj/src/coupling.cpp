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

#include "tinv/coupling.hpp"

#include <cmath>

namespace tinv {

namespace {

FeatureMap xavier_uniform(Shape kernel_shape, double gain, std::mt19937_64& rng) {
  const double fan_in = static_cast<double>(kernel_shape.c * kernel_shape.h *
                                            kernel_shape.w);
  const double fan_out = static_cast<double>(kernel_shape.n * kernel_shape.h *
                                             kernel_shape.w);
  const double bound = gain * std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  FeatureMap k(kernel_shape);
  for (Index i = 0; i < k.size(); ++i) k.data()[i] = dist(rng);
  return k;
}

template <typename P, typename Fn>
void append(std::vector<P>& out, Fn& fn) {
  for (P p : fn.parameters()) out.push_back(p);
}

}  // namespace

TransformFn::TransformFn(std::string name, Index in_channels,
                         Index out_channels, Index width, std::mt19937_64& rng,
                         const TransformInit& init)
    : name_(std::move(name)),
      in_(in_channels),
      out_(out_channels),
      width_(width) {
  if (in_channels <= 0 || out_channels <= 0 || width <= 0) {
    throw StructuralError(name_ + ": channel counts and width must be positive");
  }
  weights_.reserve(kLayers);
  biases_.reserve(kLayers);
  for (Index l = 0; l < kLayers; ++l) {
    const bool last = l == kLayers - 1;
    const Shape ks{last ? out_ : width_, in_ + l * width_, kKernel, kKernel};
    FeatureMap k = (last && init.zero_last) ? FeatureMap(ks)
                                            : xavier_uniform(ks, init.scale, rng);
    const std::string prefix = name_ + ".conv" + std::to_string(l);
    weights_.emplace_back(prefix + ".weight", std::move(k));
    biases_.emplace_back(prefix + ".bias", FeatureMap({1, ks.n, 1, 1}));
  }
}

std::vector<Parameter*> TransformFn::parameters() {
  std::vector<Parameter*> out;
  for (Index l = 0; l < kLayers; ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

std::vector<const Parameter*> TransformFn::parameters() const {
  std::vector<const Parameter*> out;
  for (Index l = 0; l < kLayers; ++l) {
    out.push_back(&weights_[l]);
    out.push_back(&biases_[l]);
  }
  return out;
}

Index TransformFn::parameter_count(Index in_channels, Index out_channels,
                                   Index width) {
  Index total = 0;
  for (Index l = 0; l < kLayers; ++l) {
    const Index cin = in_channels + l * width;
    const Index cout = l == kLayers - 1 ? out_channels : width;
    total += cout * cin * kKernel * kKernel + cout;
  }
  return total;
}

VBlock::VBlock(const std::string& name, Index low_channels, Index high_channels,
               Index width, std::mt19937_64& rng, const TransformInit& init,
               double clamp_bound)
    : phi(name + ".phi", high_channels, low_channels, width, rng, init),
      rho(name + ".rho", low_channels, high_channels, width, rng, init),
      eta(name + ".eta", low_channels, high_channels, width, rng, init),
      bound_(clamp_bound) {}

std::vector<Parameter*> VBlock::parameters() {
  std::vector<Parameter*> out;
  append(out, phi);
  append(out, rho);
  append(out, eta);
  return out;
}

std::vector<const Parameter*> VBlock::parameters() const {
  std::vector<const Parameter*> out;
  append(out, phi);
  append(out, rho);
  append(out, eta);
  return out;
}

TBlock::TBlock(const std::string& name, Index luma_channels,
               Index chroma_channels, Index high_channels, Index width,
               std::mt19937_64& rng, const TransformInit& init,
               double clamp_bound)
    : phi(name + ".phi", high_channels, chroma_channels, width, rng, init),
      theta(name + ".theta", luma_channels, chroma_channels, width, rng, init),
      nu(name + ".nu", chroma_channels, luma_channels, width, rng, init),
      pi(name + ".pi", high_channels, luma_channels, width, rng, init),
      rho(name + ".rho", chroma_channels, high_channels, width, rng, init),
      eps(name + ".eps", luma_channels, high_channels, width, rng, init),
      eta(name + ".eta", chroma_channels, high_channels, width, rng, init),
      mu(name + ".mu", luma_channels, high_channels, width, rng, init),
      bound_(clamp_bound) {}

std::vector<Parameter*> TBlock::parameters() {
  std::vector<Parameter*> out;
  for (TransformFn* fn : {&phi, &theta, &nu, &pi, &rho, &eps, &eta, &mu}) {
    append(out, *fn);
  }
  return out;
}

std::vector<const Parameter*> TBlock::parameters() const {
  std::vector<const Parameter*> out;
  for (const TransformFn* fn : {&phi, &theta, &nu, &pi, &rho, &eps, &eta, &mu}) {
    append(out, *fn);
  }
  return out;
}

}  // namespace tinv
