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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "tinv/bench.hpp"
#include "tinv/image_io.hpp"
#include "tinv/imageops.hpp"
#include "tinv/jpeg.hpp"
#include "tinv/metrics.hpp"

using namespace tinv;
using test::random_map;
namespace fs = std::filesystem;

namespace {

ModelConfig small(Variant v, int scale = 2) {
  ModelConfig c;
  c.variant = v;
  c.scale = scale;
  c.width = 4;
  c.blocks_per_stage = std::vector<int>(scale == 2 ? 1 : 2, 1);
  c.init = TransformInit{0.3, false};
  return c;
}

Dataset toy_set() {
  return {"toy", {clip01(bicubic_resize(random_map({1, 3, 4, 4}, 1, 0, 1), 4.0)),
                  clip01(bicubic_resize(random_map({1, 3, 5, 5}, 2, 0, 1), 4.0))}};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + TINV_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("bench") {
  TEST_CASE("number formatting") {
    CHECK(format_psnr(31.456) == "31.46");
    CHECK(format_psnr(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_ssim(0.912345) == "0.9123");
  }

  TEST_CASE("centre crop") {
    FeatureMap x({1, 1, 7, 10});
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<double>(i);
    const FeatureMap c = center_crop_to_multiple(x, 4);
    CHECK(c.shape() == Shape{1, 1, 4, 8});
    CHECK(c(0, 0, 0, 0) == 11);  // top 1, left 1
    CHECK(center_crop_to_multiple(c, 4).data() != nullptr);
    CHECK_THROWS_AS(center_crop_to_multiple(x, 8), StructuralError);
  }

  TEST_CASE("round-trip protocols") {
    const FeatureMap x = toy_set().images[0];
    const FeatureMap lr = quantize8(clip01(bicubic_resize(x, 0.5)));
    CHECK(max_abs_diff(bicubic_roundtrip(x, 2), clip01(bicubic_resize(lr, 2.0))) == 0.0);

    // A fresh T-IRN is box-mean down, nearest up; the LR is 8-bit.
    ModelConfig c = small(Variant::kTirn);
    c.init = TransformInit{};
    RescaleModel m(c);
    const FeatureMap box = quantize8(haar_forward(x).ll);
    CHECK(max_abs_diff(model_roundtrip(m, x), block_expand(box)) < 1e-14);
    CHECK(max_abs_diff(model_roundtrip_jpeg(m, x, 50), clip01(block_expand(jpeg_degrade(box, 50)))) <
          1e-14);

    SainModel s(small(Variant::kTirn));
    const FeatureMap y = jpeg_degrade(quantize8(clip01(s.downscaler().downscale(x).y)), 60);
    CHECK(max_abs_diff(sain_roundtrip(s, x, 60), clip01(s.upscale(y))) == 0.0);
  }

  TEST_CASE("metrics are averaged per image") {
    const Dataset d = toy_set();
    std::vector<FeatureMap> rec;
    for (const auto& im : d.images) rec.push_back(bicubic_roundtrip(im, 2));
    const Quality q = mean_quality(d.images, rec);
    CHECK(q.psnr_y == doctest::Approx((psnr_y(d.images[0], rec[0]) + psnr_y(d.images[1], rec[1])) / 2));
    CHECK(q.ssim == doctest::Approx((ssim_y(d.images[0], rec[0]) + ssim_y(d.images[1], rec[1])) / 2));
    CHECK(q.psnr_rgb ==
          doctest::Approx((psnr_rgb(d.images[0], rec[0]) + psnr_rgb(d.images[1], rec[1])) / 2));
    CHECK_THROWS_AS(mean_quality(d.images, {rec[0]}), StructuralError);
  }

  TEST_CASE("ablation report") {
    const RescaleModel a(small(Variant::kIrn)), b(small(Variant::kTirn));
    const std::vector<Dataset> sets{toy_set()};
    BenchOptions opt;
    opt.timing = false;
    const BenchReport r = run_ablation(sets, std::vector<const RescaleModel*>{&a, &b}, opt);
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows[0].variant == "Bicubic");
    CHECK(r.rows[1].variant == "IRN");
    CHECK(r.rows[2].variant == "TIRN");
    CHECK(r.rows[2].param_count == count_parameters(b));
    CHECK(r.rows[1].runtime_s == 0.0);
    std::vector<FeatureMap> rec;
    for (const auto& im : sets[0].images) rec.push_back(model_roundtrip(b, im));
    CHECK(r.rows[2].quality.psnr_y == mean_quality(sets[0].images, rec).psnr_y);

    std::ostringstream c1, c2, text;
    r.write_csv(c1);
    run_ablation(sets, std::vector<const RescaleModel*>{&a, &b}, opt).write_csv(c2);
    CHECK(c1.str() == c2.str());
    CHECK(c1.str().rfind("variant,scale,qf,dataset,psnr_y,ssim,psnr_rgb,param_count,runtime_s\nBicubic,2,,toy,", 0) == 0);
    r.write_text(text);
    CHECK(text.str().find("PSNR-Y") != std::string::npos);
    CHECK(text.str().find("note: ") != std::string::npos);

    const RescaleModel four(small(Variant::kTirn, 4));
    CHECK_THROWS_AS(run_ablation(sets, std::vector<const RescaleModel*>{&a, &four}, opt), UsageError);
  }

  TEST_CASE("ablation from checkpoints skips missing files") {
    const fs::path dir = fs::temp_directory_path() / "tinv_test_bench";
    fs::create_directories(dir);
    save_model(dir / "TIRN.tinv", RescaleModel(small(Variant::kTirn)));
    BenchOptions opt;
    opt.timing = false;
    const BenchReport r = run_ablation({toy_set()},
                                       {{"IRN", dir / "IRN.tinv"}, {"T-IRN", dir / "TIRN.tinv"}}, 2, opt);
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[1].variant == "T-IRN");
    bool noted = false;
    for (const auto& n : r.notes) noted |= n.find("skipped IRN") != std::string::npos;
    CHECK(noted);
    fs::remove_all(dir);
  }

  TEST_CASE("quality sweep report") {
    const SainModel s(small(Variant::kTirn));
    const RescaleModel base(small(Variant::kTirn));
    BenchOptions opt;
    opt.timing = false;
    const BenchReport r = run_qf_sweep(s, {30, 90}, {toy_set()}, &base, opt);
    REQUIRE(r.rows.size() == 4);
    CHECK(r.rows[0].variant == "T-SAIN");
    CHECK(r.rows[1].variant == "TIRN+JPEG");
    CHECK(*r.rows[2].qf == 90);
    CHECK(r.rows[0].quality.psnr_y < r.rows[2].quality.psnr_y);
    const RescaleModel four(small(Variant::kTirn, 4));
    CHECK_THROWS_AS(run_qf_sweep(s, {50}, {toy_set()}, &four, opt), UsageError);
  }

  TEST_CASE("command-line exit codes and file round trip") {
    const fs::path dir = fs::temp_directory_path() / "tinv_test_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string out = "\"" + dir.string() + "\"";

    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("train --bogus") == 1);
    CHECK(run_cli("train --scale 3") == 1);
    CHECK(run_cli("upscale --model " + out + "/missing.tinv --in " + out + "/missing.png --out " + out) == 2);

    REQUIRE(run_cli("train --width 2 --iterations 2 --seed 1 --out " + out) == 0);
    CHECK(fs::exists(dir / "model.tinv"));
    CHECK(fs::exists(dir / "config.json"));
    CHECK(slurp(dir / "loss.csv").rfind("iteration,total,l_hr,l_lr\n", 0) == 0);

    save_image(toy_set().images[0], dir / "im.png");
    REQUIRE(run_cli("downscale --model " + out + "/model.tinv --in " + out + "/im.png --out " + out) == 0);
    REQUIRE(run_cli("upscale --model " + out + "/model.tinv --in " + out + "/im_lr.png --latent " + out +
                    "/im_z.tinv --out " + out) == 0);
    const RescaleModel m = load_rescale_model(dir / "model.tinv");
    const FeatureMap x = load_image(dir / "im.png");
    const auto d = m.downscale(x);
    const FeatureMap lr = load_image(dir / "im_lr.png");
    CHECK(max_abs_diff(lr, quantize8(clip01(d.y))) == 0.0);
    CHECK(max_abs_diff(load_image(dir / "im_lr_up.png"), quantize8(clip01(m.upscale(lr, d.z)))) == 0.0);

    std::ofstream(dir / "bad.json") << R"({"lr0": 1e30, "iterations": 5})";
    CHECK(run_cli("train --width 2 --config " + out + "/bad.json --out " + out + "/nan") == 3);
    std::ofstream(dir / "typo.json") << R"({"learning_rate": 1})";
    CHECK(run_cli("train --config " + out + "/typo.json --out " + out) == 1);
    fs::remove_all(dir);
  }
}
