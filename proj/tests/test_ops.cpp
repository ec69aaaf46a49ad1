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

using namespace tinv;
using test::op_grad_error;
using test::random_map;

namespace {

// Direct seven-loop convolution with zero padding.
FeatureMap naive_conv(const FeatureMap& x, const FeatureMap& k, const FeatureMap& b) {
  const Index pad = k.height() / 2;
  FeatureMap out({x.n(), k.n(), x.height(), x.width()});
  for (Index n = 0; n < x.n(); ++n)
    for (Index o = 0; o < k.n(); ++o)
      for (Index y = 0; y < x.height(); ++y)
        for (Index xx = 0; xx < x.width(); ++xx) {
          double acc = b.data()[o];
          for (Index c = 0; c < x.channels(); ++c)
            for (Index ky = 0; ky < k.height(); ++ky)
              for (Index kx = 0; kx < k.width(); ++kx) {
                const Index sy = y + ky - pad, sx = xx + kx - pad;
                if (sy < 0 || sx < 0 || sy >= x.height() || sx >= x.width()) continue;
                acc += k(o, c, ky, kx) * x(n, c, sy, sx);
              }
          out(n, o, y, xx) = acc;
        }
  return out;
}

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("conv2d matches the direct loop") {
    for (auto [cin, cout, h, w, k] : {std::tuple{1, 1, 3, 3, 3}, std::tuple{3, 5, 6, 7, 3},
                                      std::tuple{2, 4, 5, 5, 1}, std::tuple{4, 2, 4, 9, 5}}) {
      const FeatureMap x = random_map({2, cin, h, w}, 10 + cin);
      const FeatureMap kern = random_map({cout, cin, k, k}, 20 + cout);
      const FeatureMap bias = random_map({1, cout, 1, 1}, 30 + k);
      CHECK(max_abs_diff(conv2d(x, kern, bias), naive_conv(x, kern, bias)) < 1e-13);
    }
  }

  TEST_CASE("conv2d shape errors") {
    const FeatureMap x({1, 3, 4, 4});
    CHECK_THROWS_AS(conv2d(x, FeatureMap({2, 2, 3, 3}), FeatureMap({1, 2, 1, 1})), StructuralError);
    CHECK_THROWS_AS(conv2d(x, FeatureMap({2, 3, 2, 2}), FeatureMap({1, 2, 1, 1})), StructuralError);
    CHECK_THROWS_AS(conv2d(x, FeatureMap({2, 3, 3, 3}), FeatureMap({1, 3, 1, 1})), StructuralError);
  }

  TEST_CASE("conv2d gradients match finite differences") {
    const double err = op_grad_error(
        [](Tape&, const std::vector<Var>& v) { return conv2d(v[0], v[1], v[2]); },
        {random_map({2, 3, 5, 4}, 1), random_map({4, 3, 3, 3}, 2), random_map({1, 4, 1, 1}, 3)});
    CHECK(err < 1e-7);
  }

  TEST_CASE("elementwise op gradients") {
    const FeatureMap a = random_map({2, 2, 3, 3}, 4);
    const FeatureMap b = random_map({2, 2, 3, 3}, 5);
    using Fn = std::function<Var(Tape&, const std::vector<Var>&)>;
    const std::vector<std::pair<const char*, Fn>> ops{
        {"add", [](Tape&, const std::vector<Var>& v) { return add(v[0], v[1]); }},
        {"sub", [](Tape&, const std::vector<Var>& v) { return sub(v[0], v[1]); }},
        {"mul", [](Tape&, const std::vector<Var>& v) { return mul(v[0], v[1]); }},
        {"neg", [](Tape&, const std::vector<Var>& v) { return neg(v[0]); }},
        {"exp", [](Tape&, const std::vector<Var>& v) { return exp(v[0]); }},
        {"scale", [](Tape&, const std::vector<Var>& v) { return scale(v[0], -2.5); }},
        {"leaky_relu", [](Tape&, const std::vector<Var>& v) { return leaky_relu(v[0]); }},
        {"clamp_scale", [](Tape&, const std::vector<Var>& v) { return clamp_scale(mul(v[0], v[1]), 1.0); }},
        {"square", [](Tape&, const std::vector<Var>& v) { return square(v[0]); }},
        {"concat", [](Tape&, const std::vector<Var>& v) { return concat_channels(v[0], v[1]); }},
        {"slice", [](Tape&, const std::vector<Var>& v) { return slice_channels(v[0], 1, 1); }},
        {"mean", [](Tape&, const std::vector<Var>& v) { return mean(mul(v[0], v[1])); }},
    };
    for (const auto& [name, fn] : ops) {
      CAPTURE(name);
      CHECK(op_grad_error(fn, {a, b}) < 1e-7);
    }
  }

  TEST_CASE("losses and their gradients") {
    const FeatureMap x = random_map({1, 3, 4, 4}, 6);
    const FeatureMap target = random_map({1, 3, 4, 4}, 7);
    CHECK(mse(x, target).item() ==
          doctest::Approx((x.array() - target.array()).square().mean()).epsilon(1e-14));
    CHECK(l1(x, target).item() ==
          doctest::Approx((x.array() - target.array()).abs().mean()).epsilon(1e-14));
    CHECK(op_grad_error([&](Tape&, const std::vector<Var>& v) { return mse(v[0], target); }, {x}) < 1e-7);
    CHECK(op_grad_error([&](Tape&, const std::vector<Var>& v) { return l1(v[0], target); }, {x}) < 1e-7);
  }

  TEST_CASE("structural op gradients") {
    const FeatureMap x = random_map({2, 3, 4, 6}, 8);
    CHECK(op_grad_error([](Tape&, const std::vector<Var>& v) {
            auto s = haar_forward(v[0]);
            return concat_channels(s.ll, s.details);
          }, {x}) < 1e-7);
    CHECK(op_grad_error([](Tape&, const std::vector<Var>& v) {
            return haar_inverse(slice_channels(v[0], 0, 1), slice_channels(v[0], 0, 3));
          }, {x}) < 1e-7);
    CHECK(op_grad_error([](Tape&, const std::vector<Var>& v) {
            auto s = rgb_to_ycbcr(v[0]);
            return concat_channels(scale(s.y, 3.0), s.c);
          }, {x}) < 1e-7);
    CHECK(op_grad_error([](Tape&, const std::vector<Var>& v) {
            return ycbcr_to_rgb(slice_channels(v[0], 0, 1), slice_channels(v[0], 1, 2));
          }, {x}) < 1e-7);
    CHECK(op_grad_error([](Tape&, const std::vector<Var>& v) { return pixel_unshuffle(v[0], 2); }, {x}) < 1e-7);
    CHECK(op_grad_error([](Tape&, const std::vector<Var>& v) { return pixel_shuffle(v[0], 1); }, {x}) < 1e-7);
    CHECK(op_grad_error([](Tape&, const std::vector<Var>& v) {
            return pixel_shuffle(concat_channels({v[0], v[0], v[0], v[0]}), 2);
          }, {random_map({1, 3, 2, 3}, 9)}) < 1e-7);
  }

  TEST_CASE("traced values equal eager values") {
    const FeatureMap x = random_map({1, 3, 4, 4}, 11);
    const FeatureMap k = random_map({2, 3, 3, 3}, 12);
    const FeatureMap b = random_map({1, 2, 1, 1}, 13);
    Tape t;
    const Var v = t.constant(x);
    CHECK(max_abs_diff(conv2d(v, t.constant(k), t.constant(b)).value(), conv2d(x, k, b)) == 0.0);
    CHECK(max_abs_diff(clamp_scale(v, 1.0).value(), clamp_scale(x, 1.0)) == 0.0);
    CHECK(max_abs_diff(haar_forward(v).details.value(), haar_forward(x).details) == 0.0);
  }

  TEST_CASE("clamp_scale is a bounded odd squashing") {
    const FeatureMap raw = random_map({1, 1, 8, 8}, 14, -50.0, 50.0);
    const FeatureMap s = clamp_scale(raw, 1.0);
    CHECK(s.array().abs().maxCoeff() <= 1.0);
    CHECK(clamp_scale(FeatureMap({1, 1, 1, 1}), 1.0).item() == 0.0);
    // bound * (2 sigmoid(r) - 1)
    const double r = 0.73;
    CHECK(clamp_scale(FeatureMap::constant({1, 1, 1, 1}, r), 2.0).item() ==
          doctest::Approx(2.0 * (2.0 / (1.0 + std::exp(-r)) - 1.0)).epsilon(1e-14));
  }

  TEST_CASE("exp rejects overflow") {
    CHECK_THROWS_AS(exp(FeatureMap::constant({1, 1, 1, 1}, 1000.0)), NumericError);
  }
}
