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

#include <filesystem>

#include "helpers.hpp"
#include "tinv/imageops.hpp"
#include "tinv/network.hpp"

using namespace tinv;
using test::random_map;

namespace {

ModelConfig config(Variant v, int scale, Index width = 4, bool random = true) {
  ModelConfig c;
  c.variant = v;
  c.scale = scale;
  c.width = width;
  c.seed = 17;
  if (random) c.init = TransformInit{1.0, false};
  return c;
}

// Independent count of a dense 5-layer transform.
Index fn_count(Index in, Index out, Index w) {
  Index total = 0;
  for (Index l = 0; l < 5; ++l) {
    const Index cin = in + l * w;
    const Index cout = l == 4 ? out : w;
    total += cout * cin * 9 + cout;
  }
  return total;
}

Index tblock_count(Index w) {
  return fn_count(9, 2, w) + fn_count(1, 2, w) + fn_count(2, 1, w) + fn_count(9, 1, w) +
         fn_count(2, 9, w) + fn_count(1, 9, w) + fn_count(2, 9, w) + fn_count(1, 9, w);
}

Index vblock_count(Index w) { return fn_count(9, 3, w) + 2 * fn_count(3, 9, w); }

const Variant kAll[] = {Variant::kIrn, Variant::kIrnYcbcr, Variant::kIrnAllZero, Variant::kTirn};

}  // namespace

TEST_SUITE("network") {
  TEST_CASE("variant names") {
    for (Variant v : kAll) CHECK(parse_variant(to_string(v)) == v);
    CHECK(to_string(Variant::kTirn) == "TIRN");
    CHECK_THROWS_AS(parse_variant("SAIN"), UsageError);
    CHECK(default_z_strategy(Variant::kIrn) == ZStrategy::kGaussianSample);
    CHECK(default_z_strategy(Variant::kIrnAllZero) == ZStrategy::kAllZero);
    CHECK(default_z_strategy(Variant::kTirn) == ZStrategy::kAllZero);
    CHECK(uses_tri_branch(Variant::kTirn));
    CHECK_FALSE(uses_tri_branch(Variant::kIrnYcbcr));
    CHECK(uses_color_split(Variant::kIrnYcbcr));
    CHECK_FALSE(uses_color_split(Variant::kIrnAllZero));
  }

  TEST_CASE("block counts") {
    CHECK(default_blocks(Variant::kTirn, 2) == std::vector<int>{3});
    CHECK(default_blocks(Variant::kTirn, 4) == std::vector<int>{3, 4});
    CHECK(default_blocks(Variant::kIrn, 4) == std::vector<int>{8, 8});
    CHECK_THROWS_AS(default_blocks(Variant::kTirn, 3), UsageError);
    ModelConfig c = config(Variant::kTirn, 4);
    c.blocks_per_stage = {1};
    CHECK_THROWS_AS(RescaleModel{c}, UsageError);
  }

  TEST_CASE("parameter counts") {
    ModelConfig c = config(Variant::kTirn, 2, 32, false);
    CHECK(count_parameters(RescaleModel(c)) == 3 * tblock_count(32));
    CHECK(count_parameters(RescaleModel(c)) == 1571061);
    c.scale = 4;
    CHECK(count_parameters(RescaleModel(c)) == 7 * tblock_count(32));
    for (Variant v : {Variant::kIrn, Variant::kIrnYcbcr, Variant::kIrnAllZero}) {
      CHECK(count_parameters(RescaleModel(config(v, 2, 8))) == 8 * vblock_count(8));
    }
    SainModel s(config(Variant::kTirn, 2, 8));
    CHECK(s.simulator().size() == 1);
    CHECK(count_parameters(s) == 4 * tblock_count(8));
    CHECK(SainModel(config(Variant::kTirn, 4, 4)).simulator().size() == 2);
  }

  TEST_CASE("shapes") {
    for (int scale : {2, 4}) {
      RescaleModel m(config(Variant::kTirn, scale));
      const FeatureMap x = random_map({2, 3, 16, 24}, 1, 0, 1);
      const auto d = m.downscale(x);
      CHECK(d.y.shape() == Shape{2, 3, 16 / scale, 24 / scale});
      CHECK(d.z.shape() == m.latent_shape(d.y.shape()));
      CHECK(d.z.channels() == 3 * (scale * scale - 1));
      CHECK(m.latent_channels() == 3 * (scale * scale - 1));
    }
    RescaleModel m4(config(Variant::kTirn, 4));
    CHECK_THROWS_AS(m4.downscale(FeatureMap({1, 3, 12, 12})), StructuralError);
    CHECK_THROWS_AS(m4.downscale(FeatureMap({1, 1, 16, 16})), StructuralError);
    CHECK_THROWS_AS(m4.upscale(FeatureMap({1, 3, 3, 4}), Latent::zeros()), StructuralError);
    CHECK_THROWS_AS(m4.upscale(FeatureMap({1, 3, 4, 4}), Latent::retained(FeatureMap({1, 9, 4, 4}))),
                    StructuralError);
  }

  TEST_CASE("pipelines invert with the retained latent") {
    for (Variant v : kAll) {
      for (int scale : {2, 4}) {
        CAPTURE(to_string(v));
        CAPTURE(scale);
        ModelConfig c = config(v, scale);
        c.blocks_per_stage = std::vector<int>(scale == 2 ? 1 : 2, 2);
        RescaleModel m(c);
        const FeatureMap x = random_map({1, 3, 16, 16}, 3, 0, 1);
        const auto d = m.downscale(x);
        CHECK(max_abs_diff(m.upscale(d.y, d.z), x) < 1e-10);
        CHECK(max_abs_diff(m.upscale(d.y, Latent::retained(d.z)), x) < 1e-10);
      }
    }
  }

  TEST_CASE("fresh T-IRN is the Haar pyramid") {
    // Zero-initialised blocks are identities, so the LR output is the 2x2
    // (or 4x4) block mean and the latent holds the detail bands.
    RescaleModel m(config(Variant::kTirn, 2, 4, false));
    const FeatureMap x = random_map({1, 3, 8, 8}, 4, 0, 1);
    const auto d = m.downscale(x);
    const auto s = haar_forward(x);
    CHECK(max_abs_diff(d.y, s.ll) < 1e-14);
    CHECK(max_abs_diff(d.z, s.details) < 1e-14);
    for (Index c = 0; c < 3; ++c) {
      double mean = 0;
      for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 2; ++j) mean += x(0, c, 2 + i, 4 + j) / 4;
      CHECK(d.y(0, c, 1, 2) == doctest::Approx(mean).epsilon(1e-14));
    }
    RescaleModel m4(config(Variant::kTirn, 4, 4, false));
    CHECK(max_abs_diff(m4.downscale(x).y, haar_forward(s.ll).ll) < 1e-14);
    // Zero latent then gives nearest-neighbour upsampling.
    CHECK(max_abs_diff(m.upscale(d.y, Latent::zeros()), block_expand(d.y)) < 1e-14);
  }

  TEST_CASE("traced passes match eager passes") {
    RescaleModel m(config(Variant::kTirn, 4));
    const FeatureMap x = random_map({1, 3, 16, 16}, 5, 0, 1);
    Tape t;
    const auto dv = m.downscale(t.constant(x));
    const auto de = m.downscale(x);
    CHECK(max_abs_diff(dv.y.value(), de.y) == 0.0);
    CHECK(max_abs_diff(dv.z.value(), de.z) == 0.0);
    CHECK(max_abs_diff(m.upscale(dv.y, Latent::zeros()).value(),
                       m.upscale(de.y, Latent::zeros())) == 0.0);
  }

  TEST_CASE("latents") {
    const Shape s{1, 9, 4, 4};
    CHECK((Latent::zeros().realize(s).array() == 0).all());
    const FeatureMap g = Latent::gaussian(3).realize(s);
    CHECK(max_abs_diff(g, Latent::gaussian(3).realize(s)) == 0.0);
    CHECK(max_abs_diff(g, Latent::gaussian(4).realize(s)) > 0.0);
    CHECK_THROWS_AS(Latent::retained(g).realize({1, 9, 4, 2}), StructuralError);
    CHECK(Latent::from_strategy(ZStrategy::kAllZero, 3).realize(s).array().abs().maxCoeff() == 0);
  }

  TEST_CASE("initialisation is seeded") {
    ModelConfig c = config(Variant::kTirn, 2);
    RescaleModel a(c), b(c);
    c.seed = 18;
    RescaleModel other(c);
    const auto pa = std::as_const(a).parameters();
    const auto pb = std::as_const(b).parameters();
    const auto po = std::as_const(other).parameters();
    double diff = 0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
      CHECK(max_abs_diff(pa[i]->value, pb[i]->value) == 0.0);
      diff = std::max(diff, max_abs_diff(pa[i]->value, po[i]->value));
    }
    CHECK(diff > 0);
  }

  TEST_CASE("config json round trip") {
    ModelConfig c = config(Variant::kIrnYcbcr, 4, 6);
    c.blocks_per_stage = {2, 5};
    c.z_strategy = ZStrategy::kAllZero;
    c.clamp_bound = 0.5;
    const ModelConfig r = ModelConfig::from_json(c.to_json());
    CHECK(r.to_json() == c.to_json());
    CHECK(r.resolved_blocks() == std::vector<int>{2, 5});
    CHECK(r.resolved_z_strategy() == ZStrategy::kAllZero);
  }

  TEST_CASE("model files") {
    const auto dir = std::filesystem::temp_directory_path() / "tinv_test_network";
    std::filesystem::create_directories(dir);
    RescaleModel m(config(Variant::kIrn, 2));
    save_model(dir / "m.tinv", m);
    CHECK(model_kind(dir / "m.tinv") == "rescale");
    const RescaleModel r = load_rescale_model(dir / "m.tinv");
    CHECK(r.config().to_json() == m.config().to_json());
    const auto pa = std::as_const(m).parameters();
    const auto pb = std::as_const(r).parameters();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(max_abs_diff(pa[i]->value, pb[i]->value) == 0.0);
    CHECK_THROWS_AS(load_sain_model(dir / "m.tinv"), StructuralError);

    SainModel s(config(Variant::kTirn, 2), 2, 60);
    save_model(dir / "s.tinv", s);
    CHECK(model_kind(dir / "s.tinv") == "sain");
    const SainModel sr = load_sain_model(dir / "s.tinv");
    CHECK(sr.simulator().size() == 2);
    CHECK(sr.codec_quality() == 60);
    const FeatureMap x = random_map({1, 3, 8, 8}, 6, 0, 1);
    CHECK(max_abs_diff(sr.downscale(x).y_hat, s.downscale(x).y_hat) == 0.0);
    CHECK_THROWS_AS(load_rescale_model(dir / "s.tinv"), StructuralError);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("asymmetric pipeline") {
    CHECK_THROWS_AS(SainModel(config(Variant::kIrn, 2)), UsageError);
    CHECK_THROWS_AS(SainModel(config(Variant::kTirn, 2), 1, 0), UsageError);
    SainModel s(config(Variant::kTirn, 2));
    const FeatureMap x = random_map({1, 3, 8, 8}, 7, 0, 1);
    const auto d = s.downscale(x);
    const auto f = s.downscaler().downscale(x);
    CHECK(max_abs_diff(d.y, f.y) == 0.0);
    CHECK(max_abs_diff(d.z, f.z) == 0.0);
    const auto back = s.unsimulate(d.y_hat, d.z_hat);
    CHECK(max_abs_diff(back.y, d.y) < 1e-10);
    CHECK(max_abs_diff(back.z, d.z) < 1e-10);

    const FeatureMap zero(d.z_hat.shape());
    const auto u = s.unsimulate(d.y_hat, zero);
    const FeatureMap expect = s.downscaler().upscale(u.y, Latent::zeros());
    CHECK(max_abs_diff(s.upscale(d.y_hat), expect) == 0.0);
  }

  TEST_CASE("model gradients") {
    ModelConfig c = config(Variant::kTirn, 2, 2);
    c.init.scale = 0.5;
    RescaleModel m(c);
    const FeatureMap x = random_map({1, 3, 8, 8}, 8, 0, 1);
    GradCheckOptions opt;
    opt.max_entries_per_param = 4;
    // A bias nudge moves every pixel of a channel, so larger steps tend to
    // straddle a leaky-rectifier kink somewhere.
    opt.step = 1e-6;
    const auto report = grad_check(
        [&](Tape& t) {
          const auto d = m.downscale(t.constant(x));
          return add(mse(d.y, haar_forward(x).ll),
                     l1(m.upscale(d.y, Latent::zeros()), x));
        },
        m.parameters(), opt);
    CHECK(report.max_rel_error < 1e-5);
  }
}
