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

// Command-line front end: training, rescaling, benchmarks and self checks.

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tinv/bench.hpp"
#include "tinv/corpus.hpp"
#include "tinv/grad_check.hpp"
#include "tinv/image_io.hpp"
#include "tinv/imageops.hpp"
#include "tinv/jpeg.hpp"
#include "tinv/metrics.hpp"
#include "tinv/rng.hpp"
#include "tinv/serialize.hpp"
#include "tinv/training.hpp"

namespace fs = std::filesystem;
using namespace tinv;

namespace {

enum Exit { kOk = 0, kUsage = 1, kIo = 2, kNumeric = 3 };

#ifdef TINV_DATA_DIR
const fs::path kDefaultCorpus = fs::path(TINV_DATA_DIR) / "corpus";
#else
const fs::path kDefaultCorpus = "data/corpus";
#endif

struct Common {
  int scale = 2;
  std::string variant = "TIRN";
  std::uint64_t seed = 0;
  fs::path out = ".";
};

void add_common(CLI::App* cmd, Common& c, bool model_flags) {
  if (model_flags) {
    cmd->add_option("--scale", c.scale, "Rescaling factor")->check(CLI::IsMember({2, 4}));
    cmd->add_option("--variant", c.variant, "IRN, IRN_YCBCR, IRN_ALLZERO or TIRN");
  }
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--out", c.out, "Output directory");
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
}

std::vector<Dataset> datasets_or_default(const std::vector<fs::path>& dirs) {
  std::vector<Dataset> out;
  for (const fs::path& d : dirs) out.push_back(load_dataset(d));
  if (out.empty()) out.push_back({"corpus-heldout", load_corpus_split(kDefaultCorpus).held_out});
  return out;
}

void emit_report(const BenchReport& report, const fs::path& out, const std::string& stem) {
  fs::create_directories(out);
  std::ofstream csv(out / (stem + ".csv"));
  report.write_csv(csv);
  std::ostringstream text;
  report.write_text(text);
  write_text(out / (stem + ".txt"), text.str());
  std::cout << text.str();
}

std::string metrics_line(const char* label, const FeatureMap& ref, const FeatureMap& rec) {
  std::ostringstream os;
  os << label << ": PSNR-Y " << format_psnr(psnr_y(ref, rec)) << " dB, SSIM "
     << format_ssim(ssim_y(ref, rec)) << ", PSNR-RGB " << format_psnr(psnr_rgb(ref, rec))
     << " dB";
  return os.str();
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
  Common common;
  fs::path config;
  fs::path data;
  Index width = desk_preset().width;
  std::optional<std::int64_t> iterations;
  bool sain = false;
};

int run_train(const TrainArgs& a) {
  const DeskPreset desk = desk_preset();
  TrainConfig cfg = desk.train;
  if (!a.config.empty()) {
    nlohmann::json merged = cfg.to_json();
    merged.update(read_json(a.config));
    cfg = TrainConfig::from_json(merged);
  }
  cfg.seed = a.common.seed;
  if (a.iterations) cfg.iterations = *a.iterations;

  ModelConfig mc;
  mc.scale = a.common.scale;
  mc.variant = parse_variant(a.common.variant);
  mc.width = a.width;
  mc.init = desk.init;
  mc.seed = a.common.seed;

  std::vector<FeatureMap> images;
  if (a.data.empty()) {
    images = load_corpus_split(kDefaultCorpus).train;
  } else {
    images = load_dataset(a.data).images;
  }

  fs::create_directories(a.common.out);
  TrainHooks hooks;
  if (cfg.checkpoint_interval > 0) hooks.checkpoint_dir = a.common.out / "checkpoints";
  hooks.on_log = [](const LossRecord& r) {
    std::cout << "iter " << r.iteration << "  total " << r.total << "  l_hr " << r.l_hr
              << "  l_lr " << r.l_lr << '\n';
  };
  std::vector<LossRecord> curve;
  if (a.sain) {
    SainModel m(mc, -1, cfg.codec_qf);
    curve = train(m, images, cfg, hooks);
    save_model(a.common.out / "model.tinv", m);
  } else {
    RescaleModel m(mc);
    curve = train(m, images, cfg, hooks);
    save_model(a.common.out / "model.tinv", m);
  }
  std::ofstream csv(a.common.out / "loss.csv");
  write_loss_csv(csv, curve, a.sain);
  nlohmann::json record{{"train", cfg.to_json()}, {"model", mc.to_json()}, {"asymmetric", a.sain}};
  write_text(a.common.out / "config.json", record.dump(2) + "\n");
  std::cout << "wrote " << (a.common.out / "model.tinv").string() << '\n';
  return kOk;
}

// --- rescale ----------------------------------------------------------------

struct RescaleArgs {
  Common common;
  fs::path model;
  fs::path in;
  fs::path latent;
  std::optional<int> qf;
  bool retain_z = false;
};

std::string stem_of(const fs::path& p) { return p.stem().string(); }

int run_downscale(const RescaleArgs& a) {
  const bool sain = model_kind(a.model) == "sain";
  std::optional<SainModel> sm;
  std::optional<RescaleModel> rm;
  if (sain) sm.emplace(load_sain_model(a.model)); else rm.emplace(load_rescale_model(a.model));
  const RescaleModel& m = sain ? sm->downscaler() : *rm;
  const FeatureMap x = load_image(a.in);
  m.check_hr_shape(x.shape());
  const Downscaled<FeatureMap> d = m.downscale(x);
  fs::create_directories(a.common.out);
  const fs::path lr = a.common.out / (stem_of(a.in) + "_lr.png");
  save_image(d.y, lr);
  Container c;
  c.meta = {{"kind", "latent"}};
  c.arrays.push_back({"z", d.z});
  save_container(a.common.out / (stem_of(a.in) + "_z.tinv"), c);
  std::cout << "wrote " << lr.string() << '\n';
  return kOk;
}

int run_upscale(const RescaleArgs& a) {
  const FeatureMap y = load_image(a.in);
  fs::create_directories(a.common.out);
  const fs::path out = a.common.out / (stem_of(a.in) + "_up.png");
  if (model_kind(a.model) == "sain") {
    const SainModel m = load_sain_model(a.model);
    save_image(clip01(m.upscale(y)), out);
  } else {
    const RescaleModel m = load_rescale_model(a.model);
    Latent z = Latent::from_strategy(m.z_strategy(), a.common.seed);
    if (!a.latent.empty()) {
      Container c = load_container(a.latent);
      if (c.arrays.size() != 1) throw IoError(a.latent.string() + " is not a latent file");
      z = Latent::retained(std::move(c.arrays.front().value));
    }
    save_image(clip01(m.upscale(y, z)), out);
  }
  std::cout << "wrote " << out.string() << '\n';
  return kOk;
}

int run_roundtrip(const RescaleArgs& a) {
  const bool sain = model_kind(a.model) == "sain";
  std::optional<SainModel> sm;
  std::optional<RescaleModel> rm;
  if (sain) sm.emplace(load_sain_model(a.model)); else rm.emplace(load_rescale_model(a.model));
  const RescaleModel& m = sain ? sm->downscaler() : *rm;
  const FeatureMap x = center_crop_to_multiple(load_image(a.in), 2 * m.scale());

  FeatureMap rec;
  if (a.retain_z) {
    const Downscaled<FeatureMap> d = m.downscale(x);
    rec = m.upscale(d.y, d.z);
    std::cout << "retained-latent reconstruction max abs error: " << max_abs_diff(rec, x)
              << '\n';
  } else if (sain) {
    rec = sain_roundtrip(*sm, x, a.qf.value_or(sm->codec_quality()));
  } else if (a.qf) {
    rec = model_roundtrip_jpeg(m, x, *a.qf);
  } else {
    rec = model_roundtrip(m, x, a.common.seed);
  }
  std::cout << metrics_line("model  ", x, rec) << '\n';
  FeatureMap bic = bicubic_roundtrip(x, m.scale());
  if (a.qf && !a.retain_z) {
    const FeatureMap lr = jpeg_degrade(quantize8(clip01(bicubic_resize(x, 1.0 / m.scale()))), *a.qf);
    bic = clip01(bicubic_resize(lr, static_cast<double>(m.scale())));
  }
  std::cout << metrics_line("bicubic", x, bic) << '\n';
  fs::create_directories(a.common.out);
  save_image(clip01(rec), a.common.out / (stem_of(a.in) + "_rec.png"));
  return kOk;
}

// --- benchmarks -------------------------------------------------------------

struct BenchArgs {
  Common common;
  fs::path models;
  fs::path model;
  fs::path baseline;
  std::vector<fs::path> data;
  std::vector<int> qfs{30, 50, 70, 80, 90};
  bool no_timing = false;
};

int run_ablate(const BenchArgs& a) {
  std::vector<Checkpoint> cps;
  for (Variant v : {Variant::kIrn, Variant::kIrnYcbcr, Variant::kIrnAllZero, Variant::kTirn}) {
    cps.push_back({to_string(v), a.models / (to_string(v) + ".tinv")});
  }
  BenchOptions opt;
  opt.timing = !a.no_timing;
  opt.latent_seed = a.common.seed;
  const BenchReport report = run_ablation(datasets_or_default(a.data), cps, a.common.scale, opt);
  for (const std::string& n : report.notes) {
    if (n.rfind("skipped", 0) == 0) std::cerr << "warning: " << n << '\n';
  }
  emit_report(report, a.common.out, "ablation");
  return kOk;
}

int run_qfsweep(const BenchArgs& a) {
  const SainModel m = load_sain_model(a.model);
  std::optional<RescaleModel> base;
  if (!a.baseline.empty()) base.emplace(load_rescale_model(a.baseline));
  BenchOptions opt;
  opt.timing = !a.no_timing;
  const BenchReport report = run_qf_sweep(m, a.qfs, datasets_or_default(a.data),
                                          base ? &*base : nullptr, opt);
  emit_report(report, a.common.out, "qfsweep");
  return kOk;
}

// --- checks -----------------------------------------------------------------

ModelConfig tiny_config(const Common& c) {
  ModelConfig mc;
  mc.scale = c.scale;
  mc.variant = parse_variant(c.variant);
  mc.width = 4;
  mc.seed = c.seed;
  mc.blocks_per_stage = std::vector<int>(c.scale == 2 ? 1 : 2, 2);
  mc.init.zero_last = false;
  mc.init.scale = 0.5;
  return mc;
}

int run_gradcheck(const Common& c) {
  RescaleModel m(tiny_config(c));
  const FeatureMap x = uniform({1, 3, 8, 8}, 0.0, 1.0, derive_seed(c.seed, 7));
  const TrainConfig cfg;
  const auto params = m.parameters();
  GradCheckOptions opt;
  opt.max_entries_per_param = 8;
  opt.seed = c.seed;
  const GradCheckReport r =
      grad_check([&](Tape& t) { return total_loss(t, x, m, cfg, c.seed).total; }, params, opt);
  for (const GradCheckEntry& e : r.entries) {
    std::cout << e.name << "  rel " << e.max_rel_error << '\n';
  }
  std::cout << "max relative error " << r.max_rel_error << (r.passed ? "  PASS" : "  FAIL")
            << '\n';
  return r.passed ? kOk : kNumeric;
}

int run_selftest(const Common& c) {
  bool ok = true;
  auto report = [&](const std::string& what, double err, double tol) {
    const bool pass = err < tol;
    ok = ok && pass;
    std::cout << (pass ? "PASS  " : "FAIL  ") << what << "  (" << err << " < " << tol << ")\n";
  };
  const FeatureMap x = uniform({2, 3, 16, 16}, 0.0, 1.0, derive_seed(c.seed, 1));
  report("haar round trip", max_abs_diff(haar_inverse(haar_forward(x)), x), 1e-12);
  const auto lc = rgb_to_ycbcr(x);
  report("colour round trip", max_abs_diff(ycbcr_to_rgb(lc.y, lc.c), x), 1e-12);

  ModelConfig mc = tiny_config(c);
  for (Variant v : {Variant::kIrn, Variant::kTirn}) {
    mc.variant = v;
    const RescaleModel m(mc);
    const Downscaled<FeatureMap> d = m.downscale(x);
    report(to_string(v) + " x" + std::to_string(mc.scale) + " retained-latent round trip",
           max_abs_diff(m.upscale(d.y, d.z), x), 1e-9);
  }
  ModelConfig zero;
  zero.scale = c.scale;
  zero.width = 4;
  const RescaleModel identity(zero);
  FeatureMap ll = x;
  for (int s = c.scale; s > 1; s /= 2) ll = haar_forward(ll).ll;
  report("zero-init downscale equals Haar LL", max_abs_diff(identity.downscale(x).y, ll), 1e-12);
  return ok ? kOk : kNumeric;
}

struct CorpusArgs {
  fs::path out = "corpus";
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tinv: invertible image rescaling"};
  app.require_subcommand(1);
  std::function<int()> action;

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a model on an image directory");
  add_common(train_cmd, train_args.common, true);
  train_cmd->add_option("--config", train_args.config, "Training config (JSON, TrainConfig keys)");
  train_cmd->add_option("--data", train_args.data, "Training images (default: bundled corpus)");
  train_cmd->add_option("--width", train_args.width, "Hidden width of the transform networks");
  train_cmd->add_option("--iterations", train_args.iterations, "Override the iteration count");
  train_cmd->add_flag("--sain", train_args.sain, "Train the asymmetric (compression-aware) model");
  train_cmd->callback([&] { action = [&] { return run_train(train_args); }; });

  RescaleArgs rs;
  auto add_rescale = [&](const char* name, const char* help, int (*fn)(const RescaleArgs&)) {
    auto* cmd = app.add_subcommand(name, help);
    add_common(cmd, rs.common, false);
    cmd->add_option("--model", rs.model, "Model file")->required();
    cmd->add_option("--in", rs.in, "Input image (.png or .ppm)")->required();
    cmd->callback([&, fn] { action = [&, fn] { return fn(rs); }; });
    return cmd;
  };
  add_rescale("downscale", "Write the LR image and its latent", run_downscale);
  add_rescale("upscale", "Reconstruct an HR image from an LR image", run_upscale)
      ->add_option("--latent", rs.latent, "Latent file from downscale (default: model strategy)");
  auto* rt = add_rescale("roundtrip", "Downscale, upscale and score against the input", run_roundtrip);
  rt->add_option("--qf", rs.qf, "JPEG-degrade the LR at this quality")->check(CLI::Range(1, 100));
  rt->add_flag("--retain-z", rs.retain_z, "Reuse the exact latent and skip 8-bit LR");

  BenchArgs bench;
  auto* ablate = app.add_subcommand("ablate", "Compare variants on image sets");
  add_common(ablate, bench.common, true);
  ablate->add_option("--models", bench.models, "Directory with <VARIANT>.tinv files")->required();
  ablate->add_option("--data", bench.data, "Evaluation image directories");
  ablate->add_flag("--no-timing", bench.no_timing, "Write zero runtimes");
  ablate->callback([&] { action = [&] { return run_ablate(bench); }; });

  auto* sweep = app.add_subcommand("qfsweep", "Score an asymmetric model across JPEG qualities");
  add_common(sweep, bench.common, false);
  sweep->add_option("--model", bench.model, "Asymmetric model file")->required();
  sweep->add_option("--baseline", bench.baseline, "Symmetric model scored under the same JPEG");
  sweep->add_option("--qf", bench.qfs, "Qualities")->check(CLI::Range(1, 100));
  sweep->add_option("--data", bench.data, "Evaluation image directories");
  sweep->add_flag("--no-timing", bench.no_timing, "Write zero runtimes");
  sweep->callback([&] { action = [&] { return run_qfsweep(bench); }; });

  Common check;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of the training loss");
  add_common(gc, check, true);
  gc->callback([&] { action = [&] { return run_gradcheck(check); }; });
  auto* st = app.add_subcommand("selftest", "Quick invertibility and identity checks");
  add_common(st, check, true);
  st->callback([&] { action = [&] { return run_selftest(check); }; });

  CorpusArgs corpus;
  auto* gen = app.add_subcommand("gencorpus", "Write the synthetic corpus as PNG files");
  gen->add_option("--out", corpus.out, "Output directory");
  gen->callback([&] {
    action = [&] {
      write_corpus(corpus.out);
      return static_cast<int>(kOk);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    return action();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const StructuralError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  }
}
