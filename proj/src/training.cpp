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

#include "tinv/training.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>

#include "tinv/imageops.hpp"
#include "tinv/jpeg.hpp"
#include "tinv/rng.hpp"

namespace tinv {

// --- config -----------------------------------------------------------------

void TrainConfig::validate(int scale) const {
  if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0) {
    throw UsageError("loss weights must be non-negative");
  }
  if (!(lr0 > 0)) throw UsageError("lr0 must be positive");
  if (lr_halving_interval <= 0) throw UsageError("lr_halving_interval must be positive");
  if (batch <= 0) throw UsageError("batch must be positive");
  if (crop <= 0 || crop % (2 * scale) != 0) {
    throw UsageError("crop " + std::to_string(crop) + " must be a positive multiple of " +
                     std::to_string(2 * scale) + " for x" + std::to_string(scale));
  }
  if (iterations < 0) throw UsageError("iterations must be non-negative");
  if (log_interval <= 0) throw UsageError("log_interval must be positive");
  if (checkpoint_interval < 0) throw UsageError("checkpoint_interval must be non-negative");
  if (codec_qf < 1 || codec_qf > 100) throw UsageError("codec_qf must be in 1..100");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1 && eps > 0)) {
    throw UsageError("Adam needs 0 <= beta < 1 and eps > 0");
  }
}

nlohmann::json TrainConfig::to_json() const {
  return {{"lambda1", lambda1},
          {"lambda2", lambda2},
          {"lambda3", lambda3},
          {"lr0", lr0},
          {"lr_halving_interval", lr_halving_interval},
          {"batch", batch},
          {"crop", crop},
          {"flips", flips},
          {"iterations", iterations},
          {"seed", seed},
          {"beta1", beta1},
          {"beta2", beta2},
          {"eps", eps},
          {"log_interval", log_interval},
          {"checkpoint_interval", checkpoint_interval},
          {"codec_qf", codec_qf}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("training config must be a JSON object");
  TrainConfig c;
  const nlohmann::json known = c.to_json();
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw UsageError("unknown training config key '" + key + "'");
  }
  try {
    c.lambda1 = j.value("lambda1", c.lambda1);
    c.lambda2 = j.value("lambda2", c.lambda2);
    c.lambda3 = j.value("lambda3", c.lambda3);
    c.lr0 = j.value("lr0", c.lr0);
    c.lr_halving_interval = j.value("lr_halving_interval", c.lr_halving_interval);
    c.batch = j.value("batch", c.batch);
    c.crop = j.value("crop", c.crop);
    c.flips = j.value("flips", c.flips);
    c.iterations = j.value("iterations", c.iterations);
    c.seed = j.value("seed", c.seed);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.eps = j.value("eps", c.eps);
    c.log_interval = j.value("log_interval", c.log_interval);
    c.checkpoint_interval = j.value("checkpoint_interval", c.checkpoint_interval);
    c.codec_qf = j.value("codec_qf", c.codec_qf);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("training config: ") + e.what());
  }
  return c;
}

DeskPreset desk_preset() {
  DeskPreset p;
  p.train.crop = 32;
  p.train.batch = 4;
  p.train.lr0 = 2e-3;
  p.train.lr_halving_interval = 800;
  p.train.iterations = 4000;
  p.init.scale = 1.0;
  return p;
}

double learning_rate(const TrainConfig& cfg, std::int64_t t) {
  return std::ldexp(cfg.lr0, -static_cast<int>(t / cfg.lr_halving_interval));
}

// --- optimiser --------------------------------------------------------------

void adam_step(std::span<Parameter* const> params, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
  if (params.empty()) throw UsageError("adam_step: no parameters");
  for (const Parameter* p : params) {
    if (p->grad.shape() != p->value.shape()) {
      throw UsageError("adam_step: missing gradient for " + p->name);
    }
  }
  if (state.m.empty()) {
    for (const Parameter* p : params) {
      state.m.emplace_back(p->value.shape());
      state.v.emplace_back(p->value.shape());
    }
  } else if (state.m.size() != params.size()) {
    throw UsageError("adam_step: optimiser state belongs to a different model");
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    auto& m = state.m[i].array();
    auto& v = state.v[i].array();
    const auto& g = p.grad.array();
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g.square();
    p.value.array() -= lr * (m / c1) / ((v / c2).sqrt() + eps);
  }
}

// --- losses -----------------------------------------------------------------

namespace {

FeatureMap lr_target(const FeatureMap& x, int scale) {
  return bicubic_resize(x, 1.0 / scale);
}

template <typename V>
LossTerms<V> rescale_terms(const V& x_in, const FeatureMap& x, const RescaleModel& m,
                           const TrainConfig& cfg, std::uint64_t latent_seed) {
  const Downscaled<V> d = m.downscale(x_in);
  const V rec = m.upscale(d.y, Latent::from_strategy(m.z_strategy(), latent_seed));
  V l_hr = l1(rec, x);
  V l_lr = mse(d.y, lr_target(x, m.scale()));
  V total = add(scale(l_hr, cfg.lambda1), scale(l_lr, cfg.lambda2));
  return {total, l_hr, l_lr, constant_like(total, FeatureMap(Shape{1, 1, 1, 1}))};
}

template <typename V>
LossTerms<V> sain_terms(const V& x_in, const FeatureMap& x, const SainModel& m,
                        const TrainConfig& cfg) {
  const SainDownscaled<V> d = m.downscale(x_in);
  const FeatureMap coded = jpeg_degrade(clip01(value_of(d.y)), cfg.codec_qf);
  const V rec = m.upscale(constant_like(d.y, coded));
  V l_hr = l1(rec, x);
  V l_lr = mse(d.y, lr_target(x, m.downscaler().scale()));
  V l_sim = mse(d.y_hat, coded);
  V total = add(add(scale(l_hr, cfg.lambda1), scale(l_lr, cfg.lambda2)),
                scale(l_sim, cfg.lambda3));
  return {total, l_hr, l_lr, l_sim};
}

LossTerms<double> values(const LossTerms<FeatureMap>& t) {
  return {t.total.item(), t.l_hr.item(), t.l_lr.item(), t.l_sim.item()};
}

}  // namespace

double loss_lr(const FeatureMap& y, const FeatureMap& x, int scale) {
  return mse(y, lr_target(x, scale)).item();
}

Var loss_lr(const Var& y, const FeatureMap& x, int scale) {
  return mse(y, lr_target(x, scale));
}

double loss_hr(const FeatureMap& x_rec, const FeatureMap& x) {
  return l1(x_rec, x).item();
}

Var loss_hr(const Var& x_rec, const FeatureMap& x) { return l1(x_rec, x); }

LossTerms<Var> total_loss(Tape& tape, const FeatureMap& x, const RescaleModel& m,
                          const TrainConfig& cfg, std::uint64_t latent_seed) {
  return rescale_terms(tape.constant(x), x, m, cfg, latent_seed);
}

LossTerms<double> total_loss(const FeatureMap& x, const RescaleModel& m,
                             const TrainConfig& cfg, std::uint64_t latent_seed) {
  return values(rescale_terms(x, x, m, cfg, latent_seed));
}

LossTerms<Var> sain_total_loss(Tape& tape, const FeatureMap& x, const SainModel& m,
                               const TrainConfig& cfg) {
  return sain_terms(tape.constant(x), x, m, cfg);
}

LossTerms<double> sain_total_loss(const FeatureMap& x, const SainModel& m,
                                  const TrainConfig& cfg) {
  return values(sain_terms(x, x, m, cfg));
}

// --- data -------------------------------------------------------------------

FeatureMap crop_patch(const FeatureMap& image, Index top, Index left, Index size,
                      bool flip_h, bool flip_v) {
  const Shape& s = image.shape();
  if (s.n != 1) throw StructuralError("crop_patch expects a single image");
  if (top < 0 || left < 0 || top + size > s.h || left + size > s.w) {
    throw UsageError("crop_patch: window outside the image");
  }
  FeatureMap out({1, s.c, size, size});
  for (Index c = 0; c < s.c; ++c) {
    for (Index y = 0; y < size; ++y) {
      const Index sy = top + (flip_v ? size - 1 - y : y);
      for (Index x = 0; x < size; ++x) {
        const Index sx = left + (flip_h ? size - 1 - x : x);
        out(0, c, y, x) = image(0, c, sy, sx);
      }
    }
  }
  return out;
}

BatchSampler::BatchSampler(std::span<const FeatureMap> images, const TrainConfig& cfg)
    : images_(images),
      batch_(cfg.batch),
      crop_(cfg.crop),
      flips_(cfg.flips),
      rng_(derive_seed(cfg.seed, 2)) {
  if (images_.empty()) throw UsageError("training set is empty");
  for (const FeatureMap& im : images_) {
    if (im.n() != 1 || im.channels() != 3) {
      throw StructuralError("training images must be single 3-channel maps, got " +
                            to_string(im.shape()));
    }
    if (im.height() < crop_ || im.width() < crop_) {
      throw UsageError("crop " + std::to_string(crop_) + " exceeds image size " +
                       std::to_string(im.height()) + "x" + std::to_string(im.width()));
    }
  }
}

FeatureMap BatchSampler::next() {
  std::vector<FeatureMap> patches;
  patches.reserve(static_cast<std::size_t>(batch_));
  for (Index b = 0; b < batch_; ++b) {
    const auto i = std::uniform_int_distribution<std::size_t>(0, images_.size() - 1)(rng_);
    const FeatureMap& im = images_[i];
    const Index top = std::uniform_int_distribution<Index>(0, im.height() - crop_)(rng_);
    const Index left = std::uniform_int_distribution<Index>(0, im.width() - crop_)(rng_);
    std::bernoulli_distribution coin(0.5);
    const bool fh = coin(rng_);
    const bool fv = coin(rng_);
    patches.push_back(crop_patch(im, top, left, crop_, flips_ && fh, flips_ && fv));
  }
  return stack_batch(patches);
}

// --- loop -------------------------------------------------------------------

namespace {

template <typename Model, typename LossFn>
std::vector<LossRecord> run_training(Model& m, int scale, std::span<const FeatureMap> images,
                                     const TrainConfig& cfg, const TrainHooks& hooks,
                                     LossFn loss_fn) {
  cfg.validate(scale);
  BatchSampler sampler(images, cfg);
  const std::vector<Parameter*> params = m.parameters();
  AdamState state;
  std::vector<LossRecord> curve;
  if (cfg.checkpoint_interval > 0 && !hooks.checkpoint_dir.empty()) {
    std::filesystem::create_directories(hooks.checkpoint_dir);
  }
  for (std::int64_t t = 0; t < cfg.iterations; ++t) {
    const FeatureMap x = sampler.next();
    for (Parameter* p : params) p->zero_grad();
    Tape tape;
    const LossTerms<Var> loss = loss_fn(tape, x, t);
    const LossRecord rec{t, loss.total.value().item(), loss.l_hr.value().item(),
                         loss.l_lr.value().item(), loss.l_sim.value().item()};
    if (!std::isfinite(rec.total)) {
      throw NumericError("training loss became non-finite at iteration " +
                         std::to_string(t));
    }
    tape.backward(loss.total);
    adam_step(params, state, learning_rate(cfg, t), cfg.beta1, cfg.beta2, cfg.eps);
    if (t % cfg.log_interval == 0 || t + 1 == cfg.iterations) {
      curve.push_back(rec);
      if (hooks.on_log) hooks.on_log(rec);
    }
    if (cfg.checkpoint_interval > 0 && !hooks.checkpoint_dir.empty() &&
        (t + 1) % cfg.checkpoint_interval == 0) {
      save_model(hooks.checkpoint_dir / ("checkpoint_" + std::to_string(t + 1) + ".tinv"), m);
    }
  }
  return curve;
}

}  // namespace

std::vector<LossRecord> train(RescaleModel& m, std::span<const FeatureMap> images,
                              const TrainConfig& cfg, const TrainHooks& hooks) {
  return run_training(m, m.scale(), images, cfg, hooks,
                      [&](Tape& tape, const FeatureMap& x, std::int64_t t) {
                        return total_loss(tape, x, m, cfg,
                                          derive_seed(cfg.seed, 3 + static_cast<std::uint64_t>(t)));
                      });
}

std::vector<LossRecord> train(SainModel& m, std::span<const FeatureMap> images,
                              const TrainConfig& cfg, const TrainHooks& hooks) {
  return run_training(m, m.downscaler().scale(), images, cfg, hooks,
                      [&](Tape& tape, const FeatureMap& x, std::int64_t) {
                        return sain_total_loss(tape, x, m, cfg);
                      });
}

void write_loss_csv(std::ostream& os, std::span<const LossRecord> curve, bool with_sim) {
  os << "iteration,total,l_hr,l_lr" << (with_sim ? ",l_sim" : "") << '\n';
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  for (const LossRecord& r : curve) {
    os << r.iteration << ',' << r.total << ',' << r.l_hr << ',' << r.l_lr;
    if (with_sim) os << ',' << r.l_sim;
    os << '\n';
  }
  os.precision(old);
}

}  // namespace tinv
