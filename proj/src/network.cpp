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

#include "tinv/network.hpp"

#include <algorithm>
#include <numeric>

#include "tinv/rng.hpp"
#include "tinv/serialize.hpp"

namespace tinv {

namespace {

constexpr Index kImageChannels = 3;
constexpr Index kStageLatentChannels = 3 * kImageChannels;

Index stage_count(int scale) {
  switch (scale) {
    case 2:
      return 1;
    case 4:
      return 2;
    default:
      throw UsageError("unsupported scale " + std::to_string(scale) +
                       " (use 2 or 4)");
  }
}

template <typename P, typename Src>
void append_params(std::vector<P>& out, Src&& src) {
  for (P p : src.parameters()) out.push_back(p);
}

}  // namespace

// --- variant metadata -------------------------------------------------------

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kIrn:
      return "IRN";
    case Variant::kIrnYcbcr:
      return "IRN_YCBCR";
    case Variant::kIrnAllZero:
      return "IRN_ALLZERO";
    case Variant::kTirn:
      return "TIRN";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  for (Variant v : {Variant::kIrn, Variant::kIrnYcbcr, Variant::kIrnAllZero,
                    Variant::kTirn}) {
    if (to_string(v) == s) return v;
  }
  throw UsageError("unknown variant '" + s +
                   "' (use IRN, IRN_YCBCR, IRN_ALLZERO or TIRN)");
}

std::string to_string(ZStrategy z) {
  return z == ZStrategy::kAllZero ? "all_zero" : "gaussian_sample";
}

bool uses_tri_branch(Variant v) { return v == Variant::kTirn; }

bool uses_color_split(Variant v) {
  return v == Variant::kTirn || v == Variant::kIrnYcbcr;
}

ZStrategy default_z_strategy(Variant v) {
  return (v == Variant::kTirn || v == Variant::kIrnAllZero)
             ? ZStrategy::kAllZero
             : ZStrategy::kGaussianSample;
}

std::vector<int> default_blocks(Variant v, int scale) {
  const Index stages = stage_count(scale);
  if (uses_tri_branch(v)) return stages == 1 ? std::vector<int>{3}
                                             : std::vector<int>{3, 4};
  return std::vector<int>(static_cast<std::size_t>(stages), 8);
}

std::vector<int> ModelConfig::resolved_blocks() const {
  std::vector<int> b =
      blocks_per_stage.empty() ? default_blocks(variant, scale) : blocks_per_stage;
  if (static_cast<Index>(b.size()) != stage_count(scale)) {
    throw UsageError("blocks_per_stage needs one entry per stage (" +
                     std::to_string(stage_count(scale)) + " for x" +
                     std::to_string(scale) + ")");
  }
  for (int n : b) {
    if (n < 0) throw UsageError("block counts must be non-negative");
  }
  return b;
}

ZStrategy ModelConfig::resolved_z_strategy() const {
  return z_strategy.value_or(default_z_strategy(variant));
}

nlohmann::json ModelConfig::to_json() const {
  return {{"scale", scale},
          {"variant", to_string(variant)},
          {"width", width},
          {"blocks_per_stage", resolved_blocks()},
          {"seed", seed},
          {"init_scale", init.scale},
          {"zero_last", init.zero_last},
          {"clamp_bound", clamp_bound},
          {"z_strategy", to_string(resolved_z_strategy())}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.scale = j.value("scale", c.scale);
  c.variant = parse_variant(j.value("variant", to_string(c.variant)));
  c.width = j.value("width", c.width);
  c.blocks_per_stage = j.value("blocks_per_stage", std::vector<int>{});
  c.seed = j.value("seed", c.seed);
  c.init.scale = j.value("init_scale", c.init.scale);
  c.init.zero_last = j.value("zero_last", c.init.zero_last);
  c.clamp_bound = j.value("clamp_bound", c.clamp_bound);
  if (j.contains("z_strategy")) {
    const std::string z = j.at("z_strategy").get<std::string>();
    if (z == "all_zero") {
      c.z_strategy = ZStrategy::kAllZero;
    } else if (z == "gaussian_sample") {
      c.z_strategy = ZStrategy::kGaussianSample;
    } else {
      throw UsageError("unknown z_strategy '" + z + "'");
    }
  }
  return c;
}

FeatureMap Latent::realize(const Shape& shape) const {
  if (std::holds_alternative<Zero>(kind_)) return FeatureMap(shape);
  if (const auto* g = std::get_if<Gaussian>(&kind_)) {
    return standard_normal(shape, g->seed);
  }
  const FeatureMap& z = std::get<FeatureMap>(kind_);
  if (z.shape() != shape) {
    throw StructuralError("latent has shape " + to_string(z.shape()) +
                          ", model expects " + to_string(shape));
  }
  return z;
}

// --- stage ------------------------------------------------------------------

Stage::Stage(const std::string& name, bool tri_branch, bool color_split,
             int blocks, Index width, std::mt19937_64& rng,
             const TransformInit& init, double clamp_bound)
    : tri_(tri_branch), color_split_(color_split) {
  if (tri_ && !color_split_) {
    throw UsageError("tri-branch stages require the colour split");
  }
  for (int b = 0; b < blocks; ++b) {
    const std::string block_name = name + ".block" + std::to_string(b);
    if (tri_) {
      tblocks_.emplace_back(block_name, 1, 2, kStageLatentChannels, width, rng,
                            init, clamp_bound);
    } else {
      vblocks_.emplace_back(block_name, kImageChannels, kStageLatentChannels,
                            width, rng, init, clamp_bound);
    }
  }
}

template <typename V>
Downscaled<V> Stage::down(const V& x) const {
  auto bands = haar_forward(x);
  if (tri_) {
    auto lc = rgb_to_ycbcr(bands.ll);
    TriStateT<V> s{lc.y, lc.c, bands.details};
    for (const TBlock& b : tblocks_) s = b.forward(s);
    return {ycbcr_to_rgb(s.luma, s.chroma), s.high};
  }
  V low = bands.ll;
  if (color_split_) {
    auto lc = rgb_to_ycbcr(bands.ll);
    low = concat_channels(lc.y, lc.c);
  }
  DualStateT<V> s{low, bands.details};
  for (const VBlock& b : vblocks_) s = b.forward(s);
  if (color_split_) {
    return {ycbcr_to_rgb(slice_channels(s.low, 0, 1), slice_channels(s.low, 1, 2)),
            s.high};
  }
  return {s.low, s.high};
}

template <typename V>
V Stage::up(const V& y, const V& z) const {
  if (tri_) {
    auto lc = rgb_to_ycbcr(y);
    TriStateT<V> s{lc.y, lc.c, z};
    for (auto it = tblocks_.rbegin(); it != tblocks_.rend(); ++it) {
      s = it->inverse(s);
    }
    return haar_inverse(ycbcr_to_rgb(s.luma, s.chroma), s.high);
  }
  V low = y;
  if (color_split_) {
    auto lc = rgb_to_ycbcr(y);
    low = concat_channels(lc.y, lc.c);
  }
  DualStateT<V> s{low, z};
  for (auto it = vblocks_.rbegin(); it != vblocks_.rend(); ++it) {
    s = it->inverse(s);
  }
  V ll = color_split_ ? ycbcr_to_rgb(slice_channels(s.low, 0, 1),
                                     slice_channels(s.low, 1, 2))
                      : s.low;
  return haar_inverse(ll, s.high);
}

std::vector<Parameter*> Stage::parameters() {
  std::vector<Parameter*> out;
  for (VBlock& b : vblocks_) append_params(out, b);
  for (TBlock& b : tblocks_) append_params(out, b);
  return out;
}

std::vector<const Parameter*> Stage::parameters() const {
  std::vector<const Parameter*> out;
  for (const VBlock& b : vblocks_) append_params(out, b);
  for (const TBlock& b : tblocks_) append_params(out, b);
  return out;
}

// --- rescale model ----------------------------------------------------------

RescaleModel::RescaleModel(const ModelConfig& config) : config_(config) {
  const std::vector<int> blocks = config_.resolved_blocks();
  if (config_.width <= 0) throw UsageError("width must be positive");
  std::mt19937_64 rng(mix_seed(config_.seed));
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    stages_.emplace_back("stage" + std::to_string(i),
                         uses_tri_branch(config_.variant),
                         uses_color_split(config_.variant), blocks[i],
                         config_.width, rng, config_.init, config_.clamp_bound);
  }
}

void RescaleModel::check_hr_shape(const Shape& x) const {
  const Index m = 2 * config_.scale;
  if (x.c != kImageChannels) {
    throw StructuralError("expected a 3-channel image, got " +
                          std::to_string(x.c) + " channels");
  }
  if (x.h % m != 0 || x.w % m != 0) {
    throw StructuralError("image size " + std::to_string(x.h) + "x" +
                          std::to_string(x.w) + " is not a multiple of " +
                          std::to_string(m) + " (required for x" +
                          std::to_string(config_.scale) +
                          "); crop or pad to a multiple of " + std::to_string(m));
  }
}

void RescaleModel::check_lr_shape(const Shape& y) const {
  if (y.c != kImageChannels) {
    throw StructuralError("expected a 3-channel LR image, got " +
                          std::to_string(y.c) + " channels");
  }
  if (y.h % 2 != 0 || y.w % 2 != 0) {
    throw StructuralError("LR image size " + std::to_string(y.h) + "x" +
                          std::to_string(y.w) +
                          " is not a multiple of 2; crop to even dimensions");
  }
}

Index RescaleModel::latent_channels() const {
  const Index s = static_cast<Index>(stages_.size());
  Index total = 0;
  for (Index i = 0; i < s; ++i) {
    const Index factor = Index{1} << (s - 1 - i);
    total += kStageLatentChannels * factor * factor;
  }
  return total;
}

Shape RescaleModel::latent_shape(const Shape& y_shape) const {
  return {y_shape.n, latent_channels(), y_shape.h, y_shape.w};
}

template <typename V>
Downscaled<V> RescaleModel::downscale(const V& x) const {
  check_hr_shape(value_of(x).shape());
  const Index s = static_cast<Index>(stages_.size());
  V cur = x;
  std::vector<V> packed;
  for (Index i = 0; i < s; ++i) {
    Downscaled<V> d = stages_[static_cast<std::size_t>(i)].down(cur);
    const Index factor = Index{1} << (s - 1 - i);
    packed.push_back(factor > 1 ? pixel_unshuffle(d.z, factor) : d.z);
    cur = d.y;
  }
  V z = packed.size() == 1 ? packed.front() : concat_channels(packed);
  return {cur, z};
}

template <typename V>
V RescaleModel::upscale(const V& y, const V& z) const {
  const Shape& ys = value_of(y).shape();
  check_lr_shape(ys);
  if (value_of(z).shape() != latent_shape(ys)) {
    throw StructuralError("latent has shape " + to_string(value_of(z).shape()) +
                          ", model expects " + to_string(latent_shape(ys)));
  }
  const Index s = static_cast<Index>(stages_.size());
  std::vector<Index> offsets(static_cast<std::size_t>(s) + 1, 0);
  for (Index i = 0; i < s; ++i) {
    const Index factor = Index{1} << (s - 1 - i);
    offsets[static_cast<std::size_t>(i) + 1] =
        offsets[static_cast<std::size_t>(i)] +
        kStageLatentChannels * factor * factor;
  }
  V cur = y;
  for (Index i = s - 1; i >= 0; --i) {
    const Index factor = Index{1} << (s - 1 - i);
    const Index begin = offsets[static_cast<std::size_t>(i)];
    const Index count = offsets[static_cast<std::size_t>(i) + 1] - begin;
    V zi = s == 1 ? z : slice_channels(z, begin, count);
    if (factor > 1) zi = pixel_shuffle(zi, factor);
    cur = stages_[static_cast<std::size_t>(i)].up(cur, zi);
  }
  return cur;
}

FeatureMap RescaleModel::upscale(const FeatureMap& y, const Latent& z) const {
  check_lr_shape(y.shape());
  return upscale(y, z.realize(latent_shape(y.shape())));
}

Var RescaleModel::upscale(const Var& y, const Latent& z) const {
  check_lr_shape(y.shape());
  return upscale(y, y.tape().constant(z.realize(latent_shape(y.shape()))));
}

std::vector<Parameter*> RescaleModel::parameters() {
  std::vector<Parameter*> out;
  for (Stage& s : stages_) append_params(out, s);
  return out;
}

std::vector<const Parameter*> RescaleModel::parameters() const {
  std::vector<const Parameter*> out;
  for (const Stage& s : stages_) append_params(out, s);
  return out;
}

Index count_parameters(const RescaleModel& m) {
  Index total = 0;
  for (const Parameter* p : m.parameters()) total += p->value.size();
  return total;
}

// --- asymmetric model -------------------------------------------------------

SainModel::SainModel(const ModelConfig& downscaler, int simulator_blocks,
                     int codec_quality)
    : f_(downscaler), codec_qf_(codec_quality) {
  if (downscaler.variant != Variant::kTirn) {
    throw UsageError("the asymmetric pipeline is built from tri-branch blocks; "
                     "use variant TIRN");
  }
  if (codec_quality < 1 || codec_quality > 100) {
    throw UsageError("codec quality must be in 1..100");
  }
  const int blocks = simulator_blocks >= 0
                         ? simulator_blocks
                         : static_cast<int>(stage_count(downscaler.scale));
  std::mt19937_64 rng(derive_seed(downscaler.seed, 1));
  for (int b = 0; b < blocks; ++b) {
    g_.emplace_back("simulator.block" + std::to_string(b), 1, 2,
                    f_.latent_channels(), downscaler.width, rng,
                    downscaler.init, downscaler.clamp_bound);
  }
}

template <typename V>
Downscaled<V> SainModel::simulate(const V& y, const V& z) const {
  auto lc = rgb_to_ycbcr(y);
  TriStateT<V> s{lc.y, lc.c, z};
  for (const TBlock& b : g_) s = b.forward(s);
  return {ycbcr_to_rgb(s.luma, s.chroma), s.high};
}

template <typename V>
Downscaled<V> SainModel::unsimulate(const V& y_hat, const V& z_hat) const {
  auto lc = rgb_to_ycbcr(y_hat);
  TriStateT<V> s{lc.y, lc.c, z_hat};
  for (auto it = g_.rbegin(); it != g_.rend(); ++it) s = it->inverse(s);
  return {ycbcr_to_rgb(s.luma, s.chroma), s.high};
}

template <typename V>
SainDownscaled<V> SainModel::downscale(const V& x) const {
  Downscaled<V> d = f_.downscale(x);
  Downscaled<V> sim = simulate(d.y, d.z);
  return {d.y, d.z, sim.y, sim.z};
}

template <typename V>
V SainModel::upscale(const V& y_degraded) const {
  const Shape& ys = value_of(y_degraded).shape();
  f_.check_lr_shape(ys);
  const Shape zs = f_.latent_shape(ys);
  Downscaled<V> restored =
      unsimulate(y_degraded, constant_like(y_degraded, FeatureMap(zs)));
  return f_.upscale(restored.y, constant_like(y_degraded, FeatureMap(zs)));
}

std::vector<Parameter*> SainModel::parameters() {
  std::vector<Parameter*> out = f_.parameters();
  for (TBlock& b : g_) append_params(out, b);
  return out;
}

std::vector<const Parameter*> SainModel::parameters() const {
  std::vector<const Parameter*> out = f_.parameters();
  for (const TBlock& b : g_) append_params(out, b);
  return out;
}

Index count_parameters(const SainModel& m) {
  Index total = 0;
  for (const Parameter* p : m.parameters()) total += p->value.size();
  return total;
}

template Downscaled<FeatureMap> Stage::down(const FeatureMap&) const;
template Downscaled<Var> Stage::down(const Var&) const;
template FeatureMap Stage::up(const FeatureMap&, const FeatureMap&) const;
template Var Stage::up(const Var&, const Var&) const;
template Downscaled<FeatureMap> RescaleModel::downscale(const FeatureMap&) const;
template Downscaled<Var> RescaleModel::downscale(const Var&) const;
template FeatureMap RescaleModel::upscale(const FeatureMap&, const FeatureMap&) const;
template Var RescaleModel::upscale(const Var&, const Var&) const;
template Downscaled<FeatureMap> SainModel::simulate(const FeatureMap&, const FeatureMap&) const;
template Downscaled<Var> SainModel::simulate(const Var&, const Var&) const;
template Downscaled<FeatureMap> SainModel::unsimulate(const FeatureMap&, const FeatureMap&) const;
template Downscaled<Var> SainModel::unsimulate(const Var&, const Var&) const;
template SainDownscaled<FeatureMap> SainModel::downscale(const FeatureMap&) const;
template SainDownscaled<Var> SainModel::downscale(const Var&) const;
template FeatureMap SainModel::upscale(const FeatureMap&) const;
template Var SainModel::upscale(const Var&) const;

// --- model files ------------------------------------------------------------

void save_model(const std::filesystem::path& path, const RescaleModel& m) {
  const auto params = m.parameters();
  save_container(path, make_container(params, {{"kind", "rescale"},
                                               {"model", m.config().to_json()}}));
}

void save_model(const std::filesystem::path& path, const SainModel& m) {
  const auto params = m.parameters();
  save_container(path,
                 make_container(params,
                                {{"kind", "sain"},
                                 {"model", m.downscaler().config().to_json()},
                                 {"simulator_blocks", m.simulator().size()},
                                 {"codec_qf", m.codec_quality()}}));
}

std::string model_kind(const std::filesystem::path& path) {
  return load_container(path).meta.value("kind", std::string{});
}

RescaleModel load_rescale_model(const std::filesystem::path& path) {
  Container c = load_container(path);
  if (c.meta.value("kind", std::string{}) != "rescale") {
    throw StructuralError(path.string() + " is not a rescale model file");
  }
  RescaleModel m(ModelConfig::from_json(c.meta.at("model")));
  const auto params = m.parameters();
  assign_parameters(c, params);
  return m;
}

SainModel load_sain_model(const std::filesystem::path& path) {
  Container c = load_container(path);
  if (c.meta.value("kind", std::string{}) != "sain") {
    throw StructuralError(path.string() + " is not an asymmetric model file");
  }
  SainModel m(ModelConfig::from_json(c.meta.at("model")),
              c.meta.at("simulator_blocks").get<int>(),
              c.meta.at("codec_qf").get<int>());
  const auto params = m.parameters();
  assign_parameters(c, params);
  return m;
}

}  // namespace tinv
