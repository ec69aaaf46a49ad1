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

#include "helpers.hpp"
#include "tinv/feature_map.hpp"

using namespace tinv;

TEST_SUITE("core") {
  TEST_CASE("shape bookkeeping and indexing") {
    FeatureMap x({2, 3, 4, 5});
    CHECK(x.size() == 120);
    CHECK(x.shape().plane() == 20);
    x(1, 2, 3, 4) = 7.0;
    CHECK(x.data()[x.offset(1, 2, 3, 4)] == 7.0);
    CHECK(x.data()[119] == 7.0);
    CHECK(x.plane(1, 2)(3, 4) == 7.0);
    CHECK_THROWS_AS(FeatureMap(Shape{1, 1, 2, 2}, Eigen::ArrayXd::Zero(3)), StructuralError);
  }

  TEST_CASE("item only for scalars") {
    CHECK(FeatureMap::constant({1, 1, 1, 1}, 2.5).item() == 2.5);
    CHECK_THROWS(FeatureMap({1, 1, 1, 2}).item());
  }

  TEST_CASE("channel slicing and concatenation invert each other") {
    const FeatureMap x = test::random_map({2, 5, 3, 3}, 1);
    const FeatureMap a = slice_channels(x, 0, 2);
    const FeatureMap b = slice_channels(x, 2, 3);
    CHECK(a.channels() == 2);
    CHECK(b(1, 0, 2, 1) == x(1, 2, 2, 1));
    CHECK(max_abs_diff(concat_channels(a, b), x) == 0.0);
    CHECK_THROWS(slice_channels(x, 4, 2));
  }

  TEST_CASE("batch stacking") {
    const FeatureMap x = test::random_map({3, 2, 2, 2}, 2);
    std::vector<FeatureMap> parts{slice_batch(x, 0, 1), slice_batch(x, 1, 2)};
    CHECK(max_abs_diff(stack_batch(parts), x) == 0.0);
  }

  TEST_CASE("float conversion") {
    const FeatureMap x = test::random_map({1, 1, 2, 2}, 3);
    const FeatureMapF f = x.cast<float>();
    CHECK(f(0, 0, 1, 1) == static_cast<float>(x(0, 0, 1, 1)));
  }
}
