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

#include "tinv/corpus.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "tinv/image_io.hpp"
#include "tinv/imageops.hpp"
#include "tinv/rng.hpp"

namespace tinv {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

struct Palette {
  double a[3];
  double b[3];
};

Palette random_palette(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Palette p;
  for (int c = 0; c < 3; ++c) {
    p.a[c] = u(rng);
    p.b[c] = u(rng);
  }
  return p;
}

FeatureMap gradient_image(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Palette p = random_palette(rng);
  const double angle = kTau * u(rng);
  const double cx = u(rng), cy = u(rng);
  const double ripple = 0.04 + 0.08 * u(rng);
  const double freq = 1.0 + 3.0 * u(rng);
  const Index s = kCorpusImageSize;
  FeatureMap out({1, 3, s, s});
  for (Index y = 0; y < s; ++y) {
    for (Index x = 0; x < s; ++x) {
      const double fx = (x + 0.5) / s, fy = (y + 0.5) / s;
      const double lin = 0.5 + 0.5 * ((fx - 0.5) * std::cos(angle) + (fy - 0.5) * std::sin(angle));
      const double rad = std::hypot(fx - cx, fy - cy);
      const double t = std::clamp(lin + ripple * std::sin(kTau * freq * rad), 0.0, 1.0);
      for (Index c = 0; c < 3; ++c) out(0, c, y, x) = p.a[c] + (p.b[c] - p.a[c]) * t;
    }
  }
  return out;
}

FeatureMap pattern_image(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Palette p = random_palette(rng);
  const double angle = std::numbers::pi * u(rng);
  const double period = 4.0 + 12.0 * u(rng);
  const bool checker = u(rng) < 0.6;
  const Index s = kCorpusImageSize;
  // 4x4 supersampling softens the edges to a realistic anti-aliased step.
  constexpr int kSub = 4;
  FeatureMap out({1, 3, s, s});
  for (Index y = 0; y < s; ++y) {
    for (Index x = 0; x < s; ++x) {
      double cover = 0.0;
      for (int sy = 0; sy < kSub; ++sy) {
        for (int sx = 0; sx < kSub; ++sx) {
          const double px = x + (sx + 0.5) / kSub, py = y + (sy + 0.5) / kSub;
          const double r = (px * std::cos(angle) + py * std::sin(angle)) / period;
          const double q = (-px * std::sin(angle) + py * std::cos(angle)) / period;
          const long a = static_cast<long>(std::floor(r));
          const long b = checker ? static_cast<long>(std::floor(q)) : 0;
          cover += ((a + b) % 2 == 0) ? 1.0 : 0.0;
        }
      }
      const double t = cover / (kSub * kSub);
      for (Index c = 0; c < 3; ++c) out(0, c, y, x) = p.a[c] + (p.b[c] - p.a[c]) * t;
    }
  }
  return out;
}

FeatureMap noise_image(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Index s = kCorpusImageSize;
  const double sigma = 0.8 + 2.2 * u(rng);
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> g(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    g[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
    total += g[static_cast<std::size_t>(i + radius)];
  }
  for (double& v : g) v /= total;

  const FeatureMap white = standard_normal({1, 3, s, s}, rng());
  FeatureMap tmp({1, 3, s, s}), out({1, 3, s, s});
  auto wrap = [s](Index i) { return ((i % s) + s) % s; };
  for (Index c = 0; c < 3; ++c) {
    for (Index y = 0; y < s; ++y) {
      for (Index x = 0; x < s; ++x) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          acc += g[static_cast<std::size_t>(k + radius)] * white(0, c, y, wrap(x + k));
        }
        tmp(0, c, y, x) = acc;
      }
    }
    for (Index y = 0; y < s; ++y) {
      for (Index x = 0; x < s; ++x) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          acc += g[static_cast<std::size_t>(k + radius)] * tmp(0, c, wrap(y + k), x);
        }
        out(0, c, y, x) = acc;
      }
    }
  }
  // Partially shared luminance keeps the channels correlated like real images.
  const double mix = 0.4 + 0.5 * u(rng);
  const double mean = 0.3 + 0.4 * u(rng);
  auto& a = out.array();
  Eigen::ArrayXd shared = Eigen::ArrayXd::Zero(s * s);
  for (Index c = 0; c < 3; ++c) shared += a.segment(c * s * s, s * s) / 3.0;
  for (Index c = 0; c < 3; ++c) {
    auto seg = a.segment(c * s * s, s * s);
    seg = mix * shared + (1.0 - mix) * seg;
  }
  const double sd = std::sqrt((a - a.mean()).square().mean());
  a = mean + 0.18 * (a - a.mean()) / sd;
  return clip01(out);
}

}  // namespace

std::vector<NamedImage> generate_corpus() {
  std::vector<NamedImage> out;
  for (int i = 0; i < kCorpusSize; ++i) {
    std::mt19937_64 rng(derive_seed(0x5eed, static_cast<std::uint64_t>(i)));
    FeatureMap im;
    const char* kind = "";
    switch (i % 3) {
      case 0:
        im = gradient_image(rng);
        kind = "gradient";
        break;
      case 1:
        im = pattern_image(rng);
        kind = "pattern";
        break;
      default:
        im = noise_image(rng);
        kind = "noise";
        break;
    }
    char name[32];
    std::snprintf(name, sizeof(name), "%02d_%s.png", i, kind);
    out.push_back({name, quantize8(im)});
  }
  return out;
}

void write_corpus(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const NamedImage& im : generate_corpus()) save_image(im.image, dir / im.name);
}

std::vector<NamedImage> load_image_dir(const std::filesystem::path& dir) {
  std::vector<NamedImage> out;
  for (const auto& path : list_images(dir)) {
    out.push_back({path.filename().string(), load_image(path)});
  }
  return out;
}

CorpusSplit load_corpus_split(const std::filesystem::path& dir) {
  const auto images = load_image_dir(dir);
  if (static_cast<int>(images.size()) != kCorpusSize) {
    throw IoError("corpus at " + dir.string() + " has " + std::to_string(images.size()) +
                  " images, expected " + std::to_string(kCorpusSize));
  }
  CorpusSplit split;
  for (int i = 0; i < kCorpusSize; ++i) {
    auto& dst = i < kCorpusTrainSize ? split.train : split.held_out;
    dst.push_back(images[static_cast<std::size_t>(i)].image);
  }
  return split;
}

}  // namespace tinv
