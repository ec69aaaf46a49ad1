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
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

#include "tinv/network.hpp"
#include "tinv/ops.hpp"

namespace tinv {

struct TrainConfig {
  double lambda1 = 1.0;   // L_hr weight
  double lambda2 = 0.25;  // L_lr weight
  double lambda3 = 1.0;   // simulator-match weight (asymmetric model only)
  double lr0 = 2e-4;
  std::int64_t lr_halving_interval = 100000;
  Index batch = 16;
  Index crop = 128;
  bool flips = true;
  std::int64_t iterations = 0;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Loss-curve sampling period; the first and last iterations are always kept.
  std::int64_t log_interval = 10;
  /// 0 disables periodic checkpoints.
  std::int64_t checkpoint_interval = 0;
  int codec_qf = 75;

  /// Throws UsageError on negative weights, non-positive sizes, or a crop
  /// that is not a multiple of 2 * scale.
  void validate(int scale) const;
  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static TrainConfig from_json(const nlohmann::json& j);
};

/// Short CPU schedule on small crops, used by the command-line trainer and
/// the toy experiments. The model side only changes width and init.
struct DeskPreset {
  TrainConfig train;
  Index width = 8;
  TransformInit init{};
};
DeskPreset desk_preset();

/// lr0 * 2^-floor(t / interval) for 0-based step t.
double learning_rate(const TrainConfig& cfg, std::int64_t t);

struct AdamState {
  std::vector<FeatureMap> m;
  std::vector<FeatureMap> v;
  std::int64_t t = 0;
};

/// One bias-corrected Adam update from Parameter::grad. Throws UsageError
/// when `params` is empty or a gradient is missing.
void adam_step(std::span<Parameter* const> params, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

// --- losses -----------------------------------------------------------------

/// MSE between the LR output and the bicubic downscale of x.
double loss_lr(const FeatureMap& y, const FeatureMap& x, int scale);
Var loss_lr(const Var& y, const FeatureMap& x, int scale);
/// Mean absolute RGB error.
double loss_hr(const FeatureMap& x_rec, const FeatureMap& x);
Var loss_hr(const Var& x_rec, const FeatureMap& x);

template <typename T>
struct LossTerms {
  T total;
  T l_hr;
  T l_lr;
  T l_sim;  // asymmetric model only
};

/// lambda1 * L_hr + lambda2 * L_lr. The reconstruction uses the model's
/// latent strategy; `latent_seed` feeds Gaussian sampling.
LossTerms<Var> total_loss(Tape& tape, const FeatureMap& x, const RescaleModel& m,
                          const TrainConfig& cfg, std::uint64_t latent_seed = 0);
LossTerms<double> total_loss(const FeatureMap& x, const RescaleModel& m,
                             const TrainConfig& cfg, std::uint64_t latent_seed = 0);

/// lambda1 * L1(x, upscale(jpeg(y))) + lambda2 * L_lr + lambda3 * MSE(y_hat,
/// jpeg(y)). The codec output is a constant of the graph.
LossTerms<Var> sain_total_loss(Tape& tape, const FeatureMap& x, const SainModel& m,
                               const TrainConfig& cfg);
LossTerms<double> sain_total_loss(const FeatureMap& x, const SainModel& m,
                                  const TrainConfig& cfg);

// --- data -------------------------------------------------------------------

/// Seeded random crops with independent horizontal/vertical flips.
class BatchSampler {
 public:
  BatchSampler(std::span<const FeatureMap> images, const TrainConfig& cfg);

  FeatureMap next();

 private:
  std::span<const FeatureMap> images_;
  Index batch_;
  Index crop_;
  bool flips_;
  std::mt19937_64 rng_;
};

/// Crop of a 1xCxHxW image, optionally mirrored.
FeatureMap crop_patch(const FeatureMap& image, Index top, Index left, Index size,
                      bool flip_h, bool flip_v);

// --- loop -------------------------------------------------------------------

struct LossRecord {
  std::int64_t iteration = 0;  // 0-based step whose batch produced the loss
  double total = 0.0;
  double l_hr = 0.0;
  double l_lr = 0.0;
  double l_sim = 0.0;
};

struct TrainHooks {
  /// Periodic checkpoints go to <dir>/checkpoint_<step>.tinv when set.
  std::filesystem::path checkpoint_dir;
  std::function<void(const LossRecord&)> on_log;
};

/// Runs cfg.iterations Adam steps. Throws NumericError when a loss turns
/// non-finite.
std::vector<LossRecord> train(RescaleModel& m, std::span<const FeatureMap> images,
                              const TrainConfig& cfg, const TrainHooks& hooks = {});
std::vector<LossRecord> train(SainModel& m, std::span<const FeatureMap> images,
                              const TrainConfig& cfg, const TrainHooks& hooks = {});

/// Header iteration,total,l_hr,l_lr[,l_sim]; values printed round-trip exact.
void write_loss_csv(std::ostream& os, std::span<const LossRecord> curve,
                    bool with_sim);

}  // namespace tinv
