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
#include <string>
#include <unordered_map>
#include <vector>

#include "tinv/feature_map.hpp"

namespace tinv {

/// A learnable tensor with its gradient accumulator. The accumulator is
/// mutable: a traced pass over a const model still deposits gradients.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, FeatureMap value);
  // Copies are distinct parameters; moves keep the identity.
  Parameter(const Parameter& other);
  Parameter& operator=(const Parameter& other);
  Parameter(Parameter&&) noexcept = default;
  Parameter& operator=(Parameter&&) noexcept = default;

  std::string name;
  FeatureMap value;
  mutable FeatureMap grad;
  std::uint64_t id = 0;

  void zero_grad() const;
};

class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape
/// lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const;
  std::size_t id() const { return id_; }
  const FeatureMap& value() const;
  const Shape& shape() const { return value().shape(); }
  Index channels() const { return shape().c; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Define-by-run record of operations for reverse-mode differentiation.
///
/// Nodes are appended in evaluation order, so descending id is a reverse
/// topological order. A tape is built for one loss evaluation and then
/// discarded.
class Tape {
 public:
  /// Receives d(loss)/d(node) and pushes contributions to the parents via
  /// accumulate().
  using BackwardFn = std::function<void(Tape&, const FeatureMap& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(FeatureMap value);
  /// The node for `p` on this tape; created on first use.
  Var leaf(const Parameter& p);
  /// Records a derived value. `fn` may be empty when no parent needs a
  /// gradient.
  Var record(FeatureMap value, const std::vector<Var>& parents, BackwardFn fn);

  /// Adds `g` into the gradient of `v`; called from BackwardFn bodies.
  void accumulate(const Var& v, const FeatureMap& g);
  void accumulate(const Var& v, FeatureMap&& g);

  /// Reverse sweep from a scalar loss. Parameter gradients are added to
  /// Parameter::grad (callers zero them between steps).
  void backward(const Var& loss);

  bool requires_grad(const Var& v) const;
  const FeatureMap& value(std::size_t id) const { return nodes_[id].value; }
  /// Gradient of a parameter leaf after backward(); zeros when the loss does
  /// not depend on it. Intermediate gradients are released during the sweep.
  FeatureMap grad(const Var& v) const;
  std::size_t size() const { return nodes_.size(); }
  /// Number of nodes whose backward function ran in the last sweep.
  std::size_t visited() const { return visited_; }

 private:
  struct Node {
    FeatureMap value;
    FeatureMap grad;
    bool has_grad = false;
    bool requires_grad = false;
    const Parameter* param = nullptr;
    BackwardFn backward;
  };

  void check_owned(const Var& v, const char* what) const;

  std::vector<Node> nodes_;
  std::unordered_map<std::uint64_t, std::size_t> leaf_of_param_;
  bool swept_ = false;
  std::size_t visited_ = 0;
};

}  // namespace tinv
