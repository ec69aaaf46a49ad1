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

#include <png.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "tinv/corpus.hpp"
#include "tinv/image_io.hpp"
#include "tinv/imageops.hpp"

using namespace tinv;
using test::random_map;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_png(const fs::path& p, png_uint_32 format, const void* data, int w, int h) {
  png_image im{};
  im.version = PNG_IMAGE_VERSION;
  im.width = static_cast<png_uint_32>(w);
  im.height = static_cast<png_uint_32>(h);
  im.format = format;
  REQUIRE(png_image_write_to_file(&im, p.string().c_str(), 0, data, 0, nullptr));
}

}  // namespace

TEST_SUITE("imageops") {
  TEST_CASE("png and ppm round trips are 8-bit exact") {
    TempDir dir("tinv_test_io");
    const FeatureMap x = random_map({1, 3, 7, 5}, 1, -0.1, 1.1);
    for (const char* name : {"a.png", "a.ppm"}) {
      save_image(x, dir.path / name);
      const FeatureMap y = load_image(dir.path / name);
      CHECK(y.shape() == x.shape());
      CHECK(max_abs_diff(y, quantize8(x)) == 0.0);
    }
    CHECK_THROWS_AS(save_image(x, dir.path / "a.bmp"), IoError);
    CHECK_THROWS_AS(save_image(FeatureMap({2, 3, 4, 4}), dir.path / "b.png"), StructuralError);
  }

  TEST_CASE("grey and alpha png become rgb") {
    TempDir dir("tinv_test_io_grey");
    const unsigned char g[4] = {0, 51, 102, 255};
    write_png(dir.path / "g.png", PNG_FORMAT_GRAY, g, 2, 2);
    const FeatureMap y = load_image(dir.path / "g.png");
    CHECK(y.shape() == Shape{1, 3, 2, 2});
    CHECK(y(0, 0, 0, 1) == 0.2);
    CHECK(y(0, 2, 1, 0) == 0.4);
    const unsigned char rgba[8] = {255, 0, 0, 255, 0, 255, 0, 255};
    write_png(dir.path / "c.png", PNG_FORMAT_RGBA, rgba, 2, 1);
    const FeatureMap c = load_image(dir.path / "c.png");
    CHECK(c(0, 0, 0, 0) == 1.0);
    CHECK(c(0, 1, 0, 1) == 1.0);
  }

  TEST_CASE("unsupported files are io errors") {
    TempDir dir("tinv_test_io_bad");
    const std::uint16_t deep[4] = {0, 1000, 30000, 65535};
    write_png(dir.path / "deep.png", PNG_FORMAT_LINEAR_Y, deep, 2, 2);
    CHECK_THROWS_AS(load_image(dir.path / "deep.png"), IoError);

    std::ofstream(dir.path / "wide.ppm", std::ios::binary) << "P6\n1 1\n65535\n\0\0\0\0\0\0";
    CHECK_THROWS_AS(load_image(dir.path / "wide.ppm"), IoError);
    std::ofstream(dir.path / "ascii.ppm", std::ios::binary) << "P3\n1 1\n255\n0 0 0\n";
    CHECK_THROWS_AS(load_image(dir.path / "ascii.ppm"), IoError);
    std::ofstream(dir.path / "short.ppm", std::ios::binary) << "P6\n2 2\n255\nabc";
    CHECK_THROWS_AS(load_image(dir.path / "short.ppm"), IoError);
    std::ofstream(dir.path / "junk.png", std::ios::binary) << "not a png";
    CHECK_THROWS_AS(load_image(dir.path / "junk.png"), IoError);
    CHECK_THROWS_AS(load_image(dir.path / "missing.png"), IoError);
    CHECK_THROWS_AS(load_image(dir.path / "notes.txt"), IoError);
  }

  TEST_CASE("image listing is sorted and filtered") {
    TempDir dir("tinv_test_io_list");
    const FeatureMap x = random_map({1, 3, 2, 2}, 2, 0, 1);
    save_image(x, dir.path / "b.png");
    save_image(x, dir.path / "a.ppm");
    std::ofstream(dir.path / "c.txt") << "x";
    const auto files = list_images(dir.path);
    REQUIRE(files.size() == 2);
    CHECK(files[0].filename() == "a.ppm");
    CHECK(files[1].filename() == "b.png");
    CHECK_THROWS_AS(list_images(dir.path / "nope"), IoError);
  }
}

TEST_SUITE("bench") {
  TEST_CASE("synthetic corpus") {
    const auto a = generate_corpus();
    const auto b = generate_corpus();
    REQUIRE(a.size() == kCorpusSize);
    CHECK(a[0].name == "00_gradient.png");
    CHECK(a[1].name == "01_pattern.png");
    CHECK(a[23].name == "23_noise.png");
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].image.shape() == Shape{1, 3, kCorpusImageSize, kCorpusImageSize});
      CHECK(max_abs_diff(a[i].image, b[i].image) == 0.0);
      CHECK(max_abs_diff(a[i].image, quantize8(a[i].image)) == 0.0);
    }
    CHECK(max_abs_diff(a[2].image, a[5].image) > 0.1);
  }

  TEST_CASE("shipped corpus matches the generator") {
    const auto shipped = load_image_dir(fs::path(TINV_DATA_DIR) / "corpus");
    const auto fresh = generate_corpus();
    REQUIRE(shipped.size() == fresh.size());
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      CHECK(shipped[i].name == fresh[i].name);
      CHECK(max_abs_diff(shipped[i].image, fresh[i].image) == 0.0);
    }
    const CorpusSplit split = load_corpus_split(fs::path(TINV_DATA_DIR) / "corpus");
    CHECK(split.train.size() == kCorpusTrainSize);
    CHECK(split.held_out.size() == kCorpusSize - kCorpusTrainSize);
    CHECK(max_abs_diff(split.held_out.front(), fresh[kCorpusTrainSize].image) == 0.0);
  }

  TEST_CASE("corpus writing and incomplete corpora") {
    TempDir dir("tinv_test_corpus");
    write_corpus(dir.path);
    CHECK(list_images(dir.path).size() == kCorpusSize);
    fs::remove(dir.path / "05_noise.png");
    CHECK_THROWS_AS(load_corpus_split(dir.path), IoError);
  }
}
