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

#include <functional>
#include <vector>

#include "tinv/grad_check.hpp"
#include "tinv/ops.hpp"
#include "tinv/rng.hpp"

namespace tinv::test {

inline FeatureMap random_map(Shape s, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  return uniform(s, lo, hi, seed);
}

/// Relative finite-difference error of the gradient of <op(inputs), R> with
/// respect to every input, R a fixed random weighting.
inline double op_grad_error(const std::function<Var(Tape&, const std::vector<Var>&)>& op,
                            std::vector<FeatureMap> inputs, std::uint64_t seed = 1) {
  std::vector<Parameter> params;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    params.emplace_back("in" + std::to_string(i), std::move(inputs[i]));
  }
  Shape out_shape;
  {
    Tape t;
    std::vector<Var> vs;
    for (auto& p : params) vs.push_back(t.leaf(p));
    out_shape = op(t, vs).shape();
  }
  const FeatureMap weight = random_map(out_shape, seed + 100);
  std::vector<Parameter*> ptrs;
  for (auto& p : params) ptrs.push_back(&p);
  const auto report = grad_check(
      [&](Tape& t) {
        std::vector<Var> vs;
        for (auto& p : params) vs.push_back(t.leaf(p));
        return sum(mul(op(t, vs), t.constant(weight)));
      },
      ptrs);
  return report.max_rel_error;
}

}  // namespace tinv::test
