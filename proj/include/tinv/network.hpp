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

// Rescaling pipelines assembled from Haar stages and invertible blocks.
//
// A stage halves the resolution: Haar analysis, optional RGB -> YCbCr split of
// the LL band, a chain of coupling blocks, and (for split variants) the merge
// back to RGB. The LL branch after the last block is that stage's LR output;
// the high branch is the stage's latent. x4 chains two stages, feeding the LR
// output of the first into the second.
//
// Latents of all stages are packed into one map at the final resolution:
// stage i's latent is space-to-depth'd by 2^(S-1-i) and the results are
// stacked along channels in stage order.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tinv/coupling.hpp"

namespace tinv {

enum class Variant { kIrn, kIrnYcbcr, kIrnAllZero, kTirn };
enum class ZStrategy { kGaussianSample, kAllZero };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);
std::string to_string(ZStrategy z);

/// Tri-branch blocks (otherwise dual-branch).
bool uses_tri_branch(Variant v);
/// LL band processed in YCbCr.
bool uses_color_split(Variant v);
ZStrategy default_z_strategy(Variant v);
/// Per-stage block counts: T-IRN uses 3 blocks at x2 and 3 + 4 at x4; the
/// dual-branch variants use 8 blocks per stage.
std::vector<int> default_blocks(Variant v, int scale);

struct ModelConfig {
  int scale = 2;
  Variant variant = Variant::kTirn;
  Index width = 32;
  /// Empty means default_blocks(variant, scale).
  std::vector<int> blocks_per_stage;
  std::uint64_t seed = 0;
  TransformInit init{};
  double clamp_bound = kDefaultClampBound;
  /// Unset means default_z_strategy(variant).
  std::optional<ZStrategy> z_strategy;

  std::vector<int> resolved_blocks() const;
  ZStrategy resolved_z_strategy() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

template <typename V>
struct Downscaled {
  V y;  // LR image, 3 channels
  V z;  // packed latent
};

/// How the latent is supplied when upscaling.
class Latent {
 public:
  static Latent zeros() { return Latent(Zero{}); }
  static Latent gaussian(std::uint64_t seed) { return Latent(Gaussian{seed}); }
  static Latent retained(FeatureMap z) { return Latent(std::move(z)); }
  static Latent from_strategy(ZStrategy s, std::uint64_t seed) {
    return s == ZStrategy::kAllZero ? zeros() : gaussian(seed);
  }

  /// Materialises the latent for the given shape; a retained latent must
  /// match it exactly.
  FeatureMap realize(const Shape& shape) const;

 private:
  struct Zero {};
  struct Gaussian {
    std::uint64_t seed;
  };
  using Kind = std::variant<Zero, Gaussian, FeatureMap>;
  explicit Latent(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

/// One Haar level plus its coupling blocks.
class Stage {
 public:
  Stage() = default;
  Stage(const std::string& name, bool tri_branch, bool color_split, int blocks,
        Index width, std::mt19937_64& rng, const TransformInit& init,
        double clamp_bound);

  template <typename V>
  Downscaled<V> down(const V& x) const;
  template <typename V>
  V up(const V& y, const V& z) const;

  bool tri_branch() const { return tri_; }
  bool color_split() const { return color_split_; }
  int block_count() const {
    return static_cast<int>(tri_ ? tblocks_.size() : vblocks_.size());
  }
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

  const std::vector<VBlock>& vblocks() const { return vblocks_; }
  const std::vector<TBlock>& tblocks() const { return tblocks_; }

 private:
  bool tri_ = true;
  bool color_split_ = true;
  std::vector<VBlock> vblocks_;
  std::vector<TBlock> tblocks_;
};

class RescaleModel {
 public:
  explicit RescaleModel(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  int scale() const { return config_.scale; }
  Variant variant() const { return config_.variant; }
  ZStrategy z_strategy() const { return config_.resolved_z_strategy(); }
  const std::vector<Stage>& stages() const { return stages_; }

  template <typename V>
  Downscaled<V> downscale(const V& x) const;
  /// Inverse pass with an explicit latent of latent_shape(y.shape()).
  template <typename V>
  V upscale(const V& y, const V& z) const;

  /// Eager upscale with the latent supplied by `z`.
  FeatureMap upscale(const FeatureMap& y, const Latent& z) const;
  /// Traced upscale with a constant latent.
  Var upscale(const Var& y, const Latent& z) const;

  Shape latent_shape(const Shape& y_shape) const;
  Index latent_channels() const;

  /// Throws StructuralError unless H and W are multiples of 2 * scale.
  void check_hr_shape(const Shape& x) const;
  /// Throws StructuralError unless h and w are even.
  void check_lr_shape(const Shape& y) const;

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

 private:
  ModelConfig config_;
  std::vector<Stage> stages_;
};

Index count_parameters(const RescaleModel& m);

template <typename V>
struct SainDownscaled {
  V y;      // LR from the downscaler
  V z;      // latent from the downscaler
  V y_hat;  // simulated-compressed LR
  V z_hat;  // simulator latent
};

/// Asymmetric pipeline: downscaler f followed by a compression simulator g
/// (a chain of tri-branch blocks over the (LR, latent) pair).
class SainModel {
 public:
  static constexpr int kDefaultCodecQuality = 75;

  explicit SainModel(const ModelConfig& downscaler, int simulator_blocks = -1,
                     int codec_quality = kDefaultCodecQuality);

  const RescaleModel& downscaler() const { return f_; }
  RescaleModel& downscaler() { return f_; }
  const std::vector<TBlock>& simulator() const { return g_; }
  int codec_quality() const { return codec_qf_; }

  template <typename V>
  SainDownscaled<V> downscale(const V& x) const;
  template <typename V>
  Downscaled<V> simulate(const V& y, const V& z) const;
  template <typename V>
  Downscaled<V> unsimulate(const V& y_hat, const V& z_hat) const;
  /// g^-1 on (degraded LR, zero latent), then f^-1 with a zero latent.
  template <typename V>
  V upscale(const V& y_degraded) const;

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

 private:
  RescaleModel f_;
  std::vector<TBlock> g_;
  int codec_qf_;
};

Index count_parameters(const SainModel& m);

// --- model files ------------------------------------------------------------

void save_model(const std::filesystem::path& path, const RescaleModel& m);
void save_model(const std::filesystem::path& path, const SainModel& m);
RescaleModel load_rescale_model(const std::filesystem::path& path);
SainModel load_sain_model(const std::filesystem::path& path);
/// "rescale" or "sain", read from the file's manifest.
std::string model_kind(const std::filesystem::path& path);

}  // namespace tinv
