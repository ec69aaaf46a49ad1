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

#include "tinv/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "tinv/corpus.hpp"
#include "tinv/imageops.hpp"
#include "tinv/jpeg.hpp"
#include "tinv/metrics.hpp"

namespace tinv {

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset d;
  d.name = dir.filename().empty() ? dir.parent_path().filename().string()
                                  : dir.filename().string();
  for (NamedImage& im : load_image_dir(dir)) d.images.push_back(std::move(im.image));
  if (d.images.empty()) throw IoError("no .png/.ppm images in " + dir.string());
  return d;
}

Quality mean_quality(const std::vector<FeatureMap>& reference,
                     const std::vector<FeatureMap>& reconstructed) {
  if (reference.size() != reconstructed.size() || reference.empty()) {
    throw StructuralError("mean_quality: need equally many (and some) images");
  }
  Quality q;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    q.psnr_y += psnr_y(reference[i], reconstructed[i]);
    q.ssim += ssim_y(reference[i], reconstructed[i]);
    q.psnr_rgb += psnr_rgb(reference[i], reconstructed[i]);
  }
  const double n = static_cast<double>(reference.size());
  return {q.psnr_y / n, q.ssim / n, q.psnr_rgb / n};
}

FeatureMap center_crop_to_multiple(const FeatureMap& x, Index multiple) {
  const Index h = x.height() / multiple * multiple;
  const Index w = x.width() / multiple * multiple;
  if (h == 0 || w == 0) {
    throw StructuralError("image " + to_string(x.shape()) + " is smaller than " +
                          std::to_string(multiple) + " pixels");
  }
  if (h == x.height() && w == x.width()) return x;
  const Index top = (x.height() - h) / 2, left = (x.width() - w) / 2;
  FeatureMap out({x.n(), x.channels(), h, w});
  for (Index n = 0; n < x.n(); ++n)
    for (Index c = 0; c < x.channels(); ++c)
      out.plane(n, c) = x.plane(n, c).block(top, left, h, w);
  return out;
}

FeatureMap bicubic_roundtrip(const FeatureMap& x, int scale) {
  const FeatureMap lr = quantize8(clip01(bicubic_resize(x, 1.0 / scale)));
  return clip01(bicubic_resize(lr, static_cast<double>(scale)));
}

FeatureMap model_roundtrip(const RescaleModel& m, const FeatureMap& x,
                           std::uint64_t latent_seed) {
  const FeatureMap y = quantize8(clip01(m.downscale(x).y));
  return clip01(m.upscale(y, Latent::from_strategy(m.z_strategy(), latent_seed)));
}

FeatureMap model_roundtrip_jpeg(const RescaleModel& m, const FeatureMap& x, int qf) {
  const FeatureMap y = jpeg_degrade(quantize8(clip01(m.downscale(x).y)), qf);
  return clip01(m.upscale(y, Latent::zeros()));
}

FeatureMap sain_roundtrip(const SainModel& m, const FeatureMap& x, int qf) {
  const FeatureMap y = jpeg_degrade(quantize8(clip01(m.downscaler().downscale(x).y)), qf);
  return clip01(m.upscale(y));
}

std::string format_psnr(double db) {
  if (std::isinf(db)) return db > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", db);
  return buf;
}

std::string format_ssim(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", s);
  return buf;
}

namespace {

std::string format_runtime(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", s);
  return buf;
}

std::vector<std::string> cells(const BenchRow& r) {
  return {r.variant,
          "x" + std::to_string(r.scale),
          r.qf ? std::to_string(*r.qf) : "-",
          r.dataset,
          format_psnr(r.quality.psnr_y),
          format_ssim(r.quality.ssim),
          format_psnr(r.quality.psnr_rgb),
          std::to_string(r.param_count),
          format_runtime(r.runtime_s)};
}

template <typename Fn>
BenchRow evaluate(const std::string& variant, int scale, std::optional<int> qf,
                  const Dataset& d, Index params, const BenchOptions& opt, Fn roundtrip) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<FeatureMap> ref, rec;
  for (const FeatureMap& im : d.images) {
    ref.push_back(center_crop_to_multiple(im, 2 * scale));
    rec.push_back(roundtrip(ref.back()));
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  return {variant, scale, qf, d.name, mean_quality(ref, rec), params,
          opt.timing ? elapsed.count() : 0.0};
}

const char* kProtocolNote =
    "8-bit LR; full-frame metrics on full-range Y (no border shave); "
    "JPEG is 4:4:4 without chroma subsampling";

}  // namespace

void BenchReport::write_csv(std::ostream& os) const {
  os << "variant,scale,qf,dataset,psnr_y,ssim,psnr_rgb,param_count,runtime_s\n";
  for (const BenchRow& r : rows) {
    auto c = cells(r);
    c[1] = std::to_string(r.scale);
    if (!r.qf) c[2].clear();
    for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
    os << '\n';
  }
}

void BenchReport::write_text(std::ostream& os) const {
  const std::vector<std::string> header{"variant", "scale", "qf", "dataset", "PSNR-Y",
                                        "SSIM", "PSNR-RGB", "params", "time(s)"};
  std::vector<std::vector<std::string>> table{header};
  for (const BenchRow& r : rows) table.push_back(cells(r));
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : table)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  for (const auto& row : table) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      // Text columns left-aligned, numbers right-aligned.
      const bool left = i == 0 || i == 3;
      os << (i ? "  " : "") << (left ? std::left : std::right)
         << std::setw(static_cast<int>(width[i])) << row[i];
    }
    os << '\n';
  }
  for (const std::string& n : notes) os << "note: " << n << '\n';
}

BenchReport run_ablation(const std::vector<Dataset>& datasets,
                         const std::vector<const RescaleModel*>& models,
                         const BenchOptions& opt) {
  BenchReport report;
  if (models.empty()) throw UsageError("run_ablation: no models");
  const int scale = models.front()->scale();
  for (const RescaleModel* m : models) {
    if (m->scale() != scale) throw UsageError("run_ablation: models disagree on scale");
  }
  for (const Dataset& d : datasets) {
    report.rows.push_back(evaluate("Bicubic", scale, std::nullopt, d, 0, opt,
                                   [&](const FeatureMap& x) { return bicubic_roundtrip(x, scale); }));
    for (const RescaleModel* m : models) {
      report.rows.push_back(evaluate(to_string(m->variant()), scale, std::nullopt, d,
                                     count_parameters(*m), opt, [&](const FeatureMap& x) {
                                       return model_roundtrip(*m, x, opt.latent_seed);
                                     }));
    }
  }
  report.notes.push_back(kProtocolNote);
  return report;
}

BenchReport run_ablation(const std::vector<Dataset>& datasets,
                         const std::vector<Checkpoint>& checkpoints, int scale,
                         const BenchOptions& opt) {
  std::vector<RescaleModel> models;
  std::vector<std::string> labels;
  std::vector<std::string> notes;
  for (const Checkpoint& c : checkpoints) {
    if (!std::filesystem::exists(c.path)) {
      notes.push_back("skipped " + c.label + ": missing checkpoint " + c.path.string());
      continue;
    }
    RescaleModel m = load_rescale_model(c.path);
    if (m.scale() != scale) {
      notes.push_back("skipped " + c.label + ": checkpoint is x" + std::to_string(m.scale()));
      continue;
    }
    models.push_back(std::move(m));
    labels.push_back(c.label);
  }
  BenchReport report;
  if (models.empty()) {
    for (const Dataset& d : datasets) {
      report.rows.push_back(evaluate("Bicubic", scale, std::nullopt, d, 0, opt,
                                     [&](const FeatureMap& x) { return bicubic_roundtrip(x, scale); }));
    }
    report.notes.push_back(kProtocolNote);
  } else {
    std::vector<const RescaleModel*> ptrs;
    for (const RescaleModel& m : models) ptrs.push_back(&m);
    report = run_ablation(datasets, ptrs, opt);
    // Rows come out as [bicubic, model...] per dataset; relabel models.
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      const std::size_t k = i % (models.size() + 1);
      if (k > 0) report.rows[i].variant = labels[k - 1];
    }
  }
  report.notes.insert(report.notes.end(), notes.begin(), notes.end());
  return report;
}

BenchReport run_qf_sweep(const SainModel& m, const std::vector<int>& qfs,
                         const std::vector<Dataset>& datasets,
                         const RescaleModel* baseline, const BenchOptions& opt) {
  BenchReport report;
  const int scale = m.downscaler().scale();
  if (baseline && baseline->scale() != scale) {
    throw UsageError("qf sweep: baseline model is x" + std::to_string(baseline->scale()));
  }
  for (const Dataset& d : datasets) {
    for (int qf : qfs) {
      report.rows.push_back(evaluate("T-SAIN", scale, qf, d, count_parameters(m), opt,
                                     [&](const FeatureMap& x) { return sain_roundtrip(m, x, qf); }));
      if (baseline) {
        report.rows.push_back(
            evaluate(to_string(baseline->variant()) + "+JPEG", scale, qf, d,
                     count_parameters(*baseline), opt,
                     [&](const FeatureMap& x) { return model_roundtrip_jpeg(*baseline, x, qf); }));
      }
    }
  }
  report.notes.push_back(kProtocolNote);
  report.notes.push_back("asymmetric model trained with a surrogate loss (HR L1 + LR guidance + simulator match)");
  return report;
}

}  // namespace tinv
