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

#include <cstdint>
#include <random>

#include "tinv/feature_map.hpp"

namespace tinv {

/// SplitMix64 finaliser; used to derive independent child seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed for stream `stream` of `base`. Distinct streams give
/// statistically independent generators.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix_seed(mix_seed(base) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

inline FeatureMap standard_normal(Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed));
  std::normal_distribution<double> dist(0.0, 1.0);
  FeatureMap out(shape);
  for (Index i = 0; i < out.size(); ++i) out.data()[i] = dist(rng);
  return out;
}

inline FeatureMap uniform(Shape shape, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed));
  std::uniform_real_distribution<double> dist(lo, hi);
  FeatureMap out(shape);
  for (Index i = 0; i < out.size(); ++i) out.data()[i] = dist(rng);
  return out;
}

}  // namespace tinv
