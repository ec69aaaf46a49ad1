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

// Evaluation protocol and metric tables.
//
// Every model round trip goes through an 8-bit LR: y is clipped and
// quantize8'd before upscaling, and reconstructions are clipped to [0, 1].
// Images whose sizes are not multiples of 2 * scale are centre-cropped.
// Metrics are computed on the full frame (no border shave).

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tinv/network.hpp"

namespace tinv {

struct Dataset {
  std::string name;
  std::vector<FeatureMap> images;
};

/// Loads all images in `dir`; the dataset is named after the directory.
Dataset load_dataset(const std::filesystem::path& dir);

struct Quality {
  double psnr_y = 0.0;
  double ssim = 0.0;
  double psnr_rgb = 0.0;
};

/// Per-image metrics averaged over the set.
Quality mean_quality(const std::vector<FeatureMap>& reference,
                     const std::vector<FeatureMap>& reconstructed);

FeatureMap center_crop_to_multiple(const FeatureMap& x, Index multiple);

FeatureMap bicubic_roundtrip(const FeatureMap& x, int scale);
/// Downscale, 8-bit LR, upscale with the model's latent strategy.
FeatureMap model_roundtrip(const RescaleModel& m, const FeatureMap& x,
                           std::uint64_t latent_seed = 0);
/// As model_roundtrip with the 8-bit LR passed through JPEG at `qf` and a
/// zero latent.
FeatureMap model_roundtrip_jpeg(const RescaleModel& m, const FeatureMap& x, int qf);
/// Downscale, 8-bit LR, JPEG at `qf`, asymmetric restore.
FeatureMap sain_roundtrip(const SainModel& m, const FeatureMap& x, int qf);

struct BenchRow {
  std::string variant;
  int scale = 2;
  std::optional<int> qf;
  std::string dataset;
  Quality quality;
  Index param_count = 0;
  double runtime_s = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<std::string> notes;

  /// Columns variant,scale,qf,dataset,psnr_y,ssim,psnr_rgb,param_count,runtime_s.
  void write_csv(std::ostream& os) const;
  /// Same numbers as the CSV, column-aligned, followed by the notes.
  void write_text(std::ostream& os) const;
};

std::string format_psnr(double db);
std::string format_ssim(double s);

struct BenchOptions {
  /// When false the runtime column is written as 0 so reports are
  /// byte-reproducible.
  bool timing = true;
  std::uint64_t latent_seed = 0;
};

struct Checkpoint {
  std::string label;
  std::filesystem::path path;
};

/// Bicubic row plus one row per (checkpoint, dataset). Missing checkpoints
/// are skipped with a note.
BenchReport run_ablation(const std::vector<Dataset>& datasets,
                         const std::vector<Checkpoint>& checkpoints, int scale,
                         const BenchOptions& opt = {});
BenchReport run_ablation(const std::vector<Dataset>& datasets,
                         const std::vector<const RescaleModel*>& models,
                         const BenchOptions& opt = {});

/// One row per (qf, dataset) for the asymmetric model; `baseline`, when
/// given, adds rows for a symmetric model under the same JPEG degradation.
BenchReport run_qf_sweep(const SainModel& m, const std::vector<int>& qfs,
                         const std::vector<Dataset>& datasets,
                         const RescaleModel* baseline = nullptr,
                         const BenchOptions& opt = {});

}  // namespace tinv
