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

#include "tinv/tape.hpp"

#include <atomic>

namespace tinv {

namespace {
std::atomic<std::uint64_t> next_parameter_id{1};
}

Parameter::Parameter(std::string name_, FeatureMap value_)
    : name(std::move(name_)),
      value(std::move(value_)),
      grad(value.shape()),
      id(next_parameter_id.fetch_add(1)) {}

Parameter::Parameter(const Parameter& other)
    : name(other.name),
      value(other.value),
      grad(other.grad),
      id(next_parameter_id.fetch_add(1)) {}

Parameter& Parameter::operator=(const Parameter& other) {
  if (this != &other) {
    name = other.name;
    value = other.value;
    grad = other.grad;
    id = next_parameter_id.fetch_add(1);
  }
  return *this;
}

void Parameter::zero_grad() const {
  if (grad.shape() != value.shape()) {
    grad = FeatureMap(value.shape());
  } else {
    grad.array().setZero();
  }
}

Tape& Var::tape() const {
  if (tape_ == nullptr) throw UsageError("Var is not attached to a tape");
  return *tape_;
}

const FeatureMap& Var::value() const { return tape().value(id_); }

void Tape::check_owned(const Var& v, const char* what) const {
  if (!v.valid() || &v.tape() != this || v.id() >= nodes_.size()) {
    throw UsageError(std::string(what) + ": variable does not belong to this tape");
  }
}

Var Tape::constant(FeatureMap value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::leaf(const Parameter& p) {
  if (auto it = leaf_of_param_.find(p.id); it != leaf_of_param_.end()) {
    return Var(this, it->second);
  }
  Node n;
  n.value = p.value;
  n.requires_grad = true;
  n.param = &p;
  nodes_.push_back(std::move(n));
  leaf_of_param_.emplace(p.id, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(FeatureMap value, const std::vector<Var>& parents,
                 BackwardFn fn) {
  bool needs = false;
  for (const Var& p : parents) {
    check_owned(p, "record");
    needs = needs || nodes_[p.id()].requires_grad;
  }
  Node n;
  n.value = std::move(value);
  n.requires_grad = needs && static_cast<bool>(fn);
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

bool Tape::requires_grad(const Var& v) const {
  check_owned(v, "requires_grad");
  return nodes_[v.id()].requires_grad;
}

void Tape::accumulate(const Var& v, const FeatureMap& g) {
  check_owned(v, "accumulate");
  Node& n = nodes_[v.id()];
  if (!n.requires_grad) return;
  require_same_shape(n.value, g, "gradient");
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
  } else {
    n.grad.array() += g.array();
  }
}

void Tape::accumulate(const Var& v, FeatureMap&& g) {
  check_owned(v, "accumulate");
  Node& n = nodes_[v.id()];
  if (!n.requires_grad) return;
  require_same_shape(n.value, g, "gradient");
  if (!n.has_grad) {
    n.grad = std::move(g);
    n.has_grad = true;
  } else {
    n.grad.array() += g.array();
  }
}

void Tape::backward(const Var& loss) {
  if (!loss.valid() || &loss.tape() != this) {
    throw UsageError("backward: loss was not traced on this tape");
  }
  check_owned(loss, "backward");
  if (swept_) throw UsageError("backward: tape has already been swept");
  if (nodes_[loss.id()].value.size() != 1) {
    throw UsageError("backward: loss must be a scalar, got shape " +
                     to_string(nodes_[loss.id()].value.shape()));
  }
  if (!nodes_[loss.id()].requires_grad) {
    throw UsageError("backward: loss does not depend on any parameter");
  }
  swept_ = true;
  visited_ = 0;
  Node& root = nodes_[loss.id()];
  root.grad = FeatureMap(root.value.shape(), 1.0);
  root.has_grad = true;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    if (!nodes_[i].has_grad) continue;
    ++visited_;
    if (nodes_[i].param != nullptr) {
      const Parameter& p = *nodes_[i].param;
      if (p.grad.shape() != p.value.shape()) p.zero_grad();
      p.grad.array() += nodes_[i].grad.array();
    } else if (nodes_[i].backward) {
      // Parents always have smaller ids, so this node's grad is final here.
      nodes_[i].backward(*this, nodes_[i].grad);
      nodes_[i].grad = FeatureMap();
    }
  }
}

FeatureMap Tape::grad(const Var& v) const {
  check_owned(v, "grad");
  const Node& n = nodes_[v.id()];
  if (!n.has_grad || n.grad.shape() != n.value.shape()) {
    return FeatureMap(n.value.shape());
  }
  return n.grad;
}

}  // namespace tinv
