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

#include <Eigen/Core>

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "tinv/error.hpp"

namespace tinv {

using Index = Eigen::Index;

/// Dimensions of a 4-D value grid in (batch, channels, height, width) order.
struct Shape {
  Index n = 0;
  Index c = 0;
  Index h = 0;
  Index w = 0;

  Index numel() const { return n * c * h * w; }
  Index plane() const { return h * w; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(const Shape& s) {
  return "(" + std::to_string(s.n) + "," + std::to_string(s.c) + "," +
         std::to_string(s.h) + "," + std::to_string(s.w) + ")";
}

inline std::ostream& operator<<(std::ostream& os, const Shape& s) {
  return os << to_string(s);
}

/// Dense NCHW grid. Storage is contiguous with width varying fastest, so a
/// single (n, c) plane is an h x w row-major block.
///
/// The shape is fixed at construction; element values may be written while a
/// map is being filled but every library operation returns a new instance.
template <typename Scalar_>
class FeatureMapT {
 public:
  using Scalar = Scalar_;
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using PlaneMap =
      Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic,
                               Eigen::RowMajor>>;
  using ConstPlaneMap =
      Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>;

  FeatureMapT() = default;

  explicit FeatureMapT(Shape shape, Scalar fill = Scalar(0))
      : shape_(shape), data_(Array::Constant(checked_numel(shape), fill)) {}

  FeatureMapT(Shape shape, Array data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != checked_numel(shape)) {
      throw StructuralError("feature map data size " +
                            std::to_string(data_.size()) +
                            " does not match shape " + to_string(shape));
    }
  }

  static FeatureMapT zeros(Shape shape) { return FeatureMapT(shape); }
  static FeatureMapT constant(Shape shape, Scalar v) {
    return FeatureMapT(shape, v);
  }

  const Shape& shape() const { return shape_; }
  Index n() const { return shape_.n; }
  Index channels() const { return shape_.c; }
  Index height() const { return shape_.h; }
  Index width() const { return shape_.w; }
  Index size() const { return data_.size(); }
  bool empty() const { return data_.size() == 0; }

  const Array& array() const { return data_; }
  Array& array() { return data_; }
  const Scalar* data() const { return data_.data(); }
  Scalar* data() { return data_.data(); }

  Index offset(Index n, Index c, Index y, Index x) const {
    return ((n * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }
  Scalar& operator()(Index n, Index c, Index y, Index x) {
    return data_[offset(n, c, y, x)];
  }
  Scalar operator()(Index n, Index c, Index y, Index x) const {
    return data_[offset(n, c, y, x)];
  }

  PlaneMap plane(Index n, Index c) {
    return PlaneMap(data_.data() + offset(n, c, 0, 0), shape_.h, shape_.w);
  }
  ConstPlaneMap plane(Index n, Index c) const {
    return ConstPlaneMap(data_.data() + offset(n, c, 0, 0), shape_.h,
                         shape_.w);
  }

  Scalar item() const {
    if (data_.size() != 1) {
      throw StructuralError("item() on non-scalar map of shape " +
                            to_string(shape_));
    }
    return data_[0];
  }

  bool all_finite() const { return data_.isFinite().all(); }

  template <typename Other>
  FeatureMapT<Other> cast() const {
    return FeatureMapT<Other>(shape_, data_.template cast<Other>().eval());
  }

 private:
  static Index checked_numel(const Shape& s) {
    if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0) {
      throw StructuralError("negative dimension in shape " + to_string(s));
    }
    return s.numel();
  }

  Shape shape_{};
  Array data_{};
};

using FeatureMap = FeatureMapT<double>;
using FeatureMapF = FeatureMapT<float>;

template <typename Scalar>
void require_same_shape(const FeatureMapT<Scalar>& a,
                        const FeatureMapT<Scalar>& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw StructuralError(std::string(what) + ": shape mismatch " +
                          to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
}

template <typename Scalar>
Scalar max_abs_diff(const FeatureMapT<Scalar>& a,
                    const FeatureMapT<Scalar>& b) {
  require_same_shape(a, b, "max_abs_diff");
  if (a.size() == 0) return Scalar(0);
  return (a.array() - b.array()).abs().maxCoeff();
}

/// Copies channels [begin, begin + count) of every batch item.
template <typename Scalar>
FeatureMapT<Scalar> slice_channels(const FeatureMapT<Scalar>& x, Index begin,
                                   Index count) {
  const Shape& s = x.shape();
  if (begin < 0 || count < 0 || begin + count > s.c) {
    throw StructuralError("slice_channels: range [" + std::to_string(begin) +
                          "," + std::to_string(begin + count) +
                          ") outside " + std::to_string(s.c) + " channels");
  }
  FeatureMapT<Scalar> out({s.n, count, s.h, s.w});
  const Index block = count * s.plane();
  for (Index n = 0; n < s.n; ++n) {
    out.array().segment(n * block, block) =
        x.array().segment(x.offset(n, begin, 0, 0), block);
  }
  return out;
}

/// Stacks maps along the channel axis; batch and spatial dims must agree.
template <typename Scalar>
FeatureMapT<Scalar> concat_channels(
    const std::vector<FeatureMapT<Scalar>>& parts) {
  Shape s{};
  bool first = true;
  Index total = 0;
  for (const FeatureMapT<Scalar>& p : parts) {
    if (first) {
      s = p.shape();
      first = false;
    } else if (p.n() != s.n || p.height() != s.h || p.width() != s.w) {
      throw StructuralError("concat_channels: incompatible shapes " +
                            to_string(s) + " and " + to_string(p.shape()));
    }
    total += p.channels();
  }
  s.c = total;
  FeatureMapT<Scalar> out(s);
  Index at = 0;
  for (const FeatureMapT<Scalar>& p : parts) {
    const Index block = p.channels() * s.plane();
    for (Index n = 0; n < s.n; ++n) {
      out.array().segment(out.offset(n, at, 0, 0), block) =
          p.array().segment(n * block, block);
    }
    at += p.channels();
  }
  return out;
}

template <typename Scalar>
FeatureMapT<Scalar> concat_channels(const FeatureMapT<Scalar>& a,
                                    const FeatureMapT<Scalar>& b) {
  const FeatureMapT<Scalar>* parts[] = {&a, &b};
  Shape s = a.shape();
  if (b.n() != s.n || b.height() != s.h || b.width() != s.w) {
    throw StructuralError("concat_channels: incompatible shapes " +
                          to_string(a.shape()) + " and " +
                          to_string(b.shape()));
  }
  s.c = a.channels() + b.channels();
  FeatureMapT<Scalar> out(s);
  Index at = 0;
  for (const auto* p : parts) {
    const Index block = p->channels() * s.plane();
    for (Index n = 0; n < s.n; ++n) {
      out.array().segment(out.offset(n, at, 0, 0), block) =
          p->array().segment(n * block, block);
    }
    at += p->channels();
  }
  return out;
}

/// Items [begin, begin + count) along the batch axis.
template <typename Scalar>
FeatureMapT<Scalar> slice_batch(const FeatureMapT<Scalar>& x, Index begin,
                                Index count) {
  const Shape& s = x.shape();
  if (begin < 0 || count < 0 || begin + count > s.n) {
    throw StructuralError("slice_batch: range outside batch of " +
                          std::to_string(s.n));
  }
  const Index block = s.c * s.plane();
  return FeatureMapT<Scalar>({count, s.c, s.h, s.w},
                             x.array().segment(begin * block, count * block));
}

template <typename Scalar>
FeatureMapT<Scalar> stack_batch(const std::vector<FeatureMapT<Scalar>>& items) {
  Shape s{};
  Index count = 0;
  for (const FeatureMapT<Scalar>& it : items) {
    if (count == 0) {
      s = it.shape();
    } else if (it.channels() != s.c || it.height() != s.h ||
               it.width() != s.w) {
      throw StructuralError("stack_batch: incompatible item shapes");
    }
    count += it.n();
  }
  s.n = count;
  FeatureMapT<Scalar> out(s);
  Index at = 0;
  for (const FeatureMapT<Scalar>& it : items) {
    out.array().segment(at, it.size()) = it.array();
    at += it.size();
  }
  return out;
}

}  // namespace tinv
