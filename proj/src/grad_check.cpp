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

#include "tinv/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace tinv {

namespace {

double evaluate(const TracedLoss& fn) {
  Tape tape;
  return fn(tape).value().item();
}

}  // namespace

GradCheckReport grad_check(const TracedLoss& fn,
                           std::span<Parameter* const> params,
                           const GradCheckOptions& options) {
  const double base = evaluate(fn);
  if (evaluate(fn) != base) {
    throw UnreliableCheckError(
        "grad_check: function returned different values for identical inputs");
  }

  for (Parameter* p : params) p->zero_grad();
  {
    Tape tape;
    Var loss = fn(tape);
    tape.backward(loss);
  }

  std::mt19937_64 rng(options.seed);
  GradCheckReport report;
  for (Parameter* p : params) {
    const Index numel = p->value.size();
    std::vector<Index> order(static_cast<std::size_t>(numel));
    std::iota(order.begin(), order.end(), Index{0});
    if (options.max_entries_per_param > 0 &&
        options.max_entries_per_param < numel) {
      std::shuffle(order.begin(), order.end(), rng);
      order.resize(static_cast<std::size_t>(options.max_entries_per_param));
    }

    GradCheckEntry entry;
    entry.name = p->name;
    double scale = options.scale_floor;
    std::vector<double> diffs;
    diffs.reserve(order.size());
    for (Index i : order) {
      const double saved = p->value.data()[i];
      p->value.data()[i] = saved + options.step;
      const double plus = evaluate(fn);
      p->value.data()[i] = saved - options.step;
      const double minus = evaluate(fn);
      p->value.data()[i] = saved;
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double analytic = p->grad.data()[i];
      scale = std::max({scale, std::abs(numeric), std::abs(analytic)});
      diffs.push_back(std::abs(numeric - analytic));
    }
    entry.checked = static_cast<Index>(order.size());
    for (double d : diffs) entry.max_abs_error = std::max(entry.max_abs_error, d);
    entry.max_rel_error = entry.max_abs_error / scale;
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.entries.push_back(std::move(entry));
  }
  report.passed = std::isfinite(report.max_rel_error) &&
                  report.max_rel_error < options.tolerance;
  return report;
}

}  // namespace tinv
