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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tinv/tape.hpp"

namespace tinv {

/// Thrown when the checked function does not reproduce its own value.
class UnreliableCheckError : public UsageError {
 public:
  using UsageError::UsageError;
};

struct GradCheckOptions {
  double step = 1e-6;
  double tolerance = 1e-5;
  /// Entries compared per parameter; <= 0 means every entry.
  Index max_entries_per_param = 0;
  /// Lower bound on the normaliser of the relative error.
  double scale_floor = 1e-6;
  std::uint64_t seed = 0;
};

struct GradCheckEntry {
  std::string name;
  Index checked = 0;
  double max_abs_error = 0.0;
  /// max |analytic - numeric| / max(max |numeric|, max |analytic|, floor)
  /// over the checked entries.
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  bool passed = false;
};

/// Builds the scalar loss on the supplied tape.
using TracedLoss = std::function<Var(Tape&)>;

/// Compares reverse-mode gradients of `fn` with central finite differences.
GradCheckReport grad_check(const TracedLoss& fn,
                           std::span<Parameter* const> params,
                           const GradCheckOptions& options = {});

}  // namespace tinv
