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

#include "tinv/ops.hpp"

#include <cmath>
#include <string>

namespace tinv {

namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require_same(const FeatureMap& a, const FeatureMap& b, const char* op) {
  require_same_shape(a, b, op);
}

struct ConvGeometry {
  Index n, cin, cout, h, w, k, pad;
};

ConvGeometry conv_geometry(const Shape& x, const Shape& kernel,
                           const Shape* bias) {
  if (kernel.h != kernel.w || kernel.h % 2 == 0) {
    throw StructuralError("conv2d: kernel must be square with odd size, got " +
                          to_string(kernel));
  }
  if (kernel.c != x.c) {
    throw StructuralError("conv2d: input has " + std::to_string(x.c) +
                          " channels but kernel expects " +
                          std::to_string(kernel.c));
  }
  if (bias != nullptr && bias->numel() != kernel.n) {
    throw StructuralError("conv2d: bias size " + std::to_string(bias->numel()) +
                          " does not match " + std::to_string(kernel.n) +
                          " output channels");
  }
  return {x.n, x.c, kernel.n, x.h, x.w, kernel.h, kernel.h / 2};
}

// Rows: (c, ky, kx); columns: (n, y, x). Zero outside the image.
RowMatrix im2col(const FeatureMap& x, const ConvGeometry& g) {
  const Index hw = g.h * g.w;
  RowMatrix col = RowMatrix::Zero(g.cin * g.k * g.k, g.n * hw);
  for (Index c = 0; c < g.cin; ++c) {
    for (Index ky = 0; ky < g.k; ++ky) {
      for (Index kx = 0; kx < g.k; ++kx) {
        const Index row = (c * g.k + ky) * g.k + kx;
        const Index dy = ky - g.pad;
        const Index dx = kx - g.pad;
        const Index x0 = std::max<Index>(0, -dx);
        const Index x1 = std::min<Index>(g.w, g.w - dx);
        for (Index n = 0; n < g.n; ++n) {
          const double* src = x.data() + x.offset(n, c, 0, 0);
          double* dst = col.data() + row * col.cols() + n * hw;
          for (Index y = 0; y < g.h; ++y) {
            const Index sy = y + dy;
            if (sy < 0 || sy >= g.h) continue;
            const double* s = src + sy * g.w + dx;
            double* d = dst + y * g.w;
            for (Index xx = x0; xx < x1; ++xx) d[xx] = s[xx];
          }
        }
      }
    }
  }
  return col;
}

FeatureMap col2im(const RowMatrix& col, const ConvGeometry& g) {
  const Index hw = g.h * g.w;
  FeatureMap x({g.n, g.cin, g.h, g.w});
  for (Index c = 0; c < g.cin; ++c) {
    for (Index ky = 0; ky < g.k; ++ky) {
      for (Index kx = 0; kx < g.k; ++kx) {
        const Index row = (c * g.k + ky) * g.k + kx;
        const Index dy = ky - g.pad;
        const Index dx = kx - g.pad;
        const Index x0 = std::max<Index>(0, -dx);
        const Index x1 = std::min<Index>(g.w, g.w - dx);
        for (Index n = 0; n < g.n; ++n) {
          double* dst = x.data() + x.offset(n, c, 0, 0);
          const double* src = col.data() + row * col.cols() + n * hw;
          for (Index y = 0; y < g.h; ++y) {
            const Index sy = y + dy;
            if (sy < 0 || sy >= g.h) continue;
            double* d = dst + sy * g.w + dx;
            const double* s = src + y * g.w;
            for (Index xx = x0; xx < x1; ++xx) d[xx] += s[xx];
          }
        }
      }
    }
  }
  return x;
}

Eigen::Map<const RowMatrix> kernel_matrix(const FeatureMap& kernel) {
  const Shape& s = kernel.shape();
  return Eigen::Map<const RowMatrix>(kernel.data(), s.n, s.c * s.h * s.w);
}

// (n, c, p) <-> RowMatrix (c, n*p)
RowMatrix channels_by_pixels(const FeatureMap& x) {
  const Shape& s = x.shape();
  const Index hw = s.plane();
  RowMatrix m(s.c, s.n * hw);
  for (Index n = 0; n < s.n; ++n)
    for (Index c = 0; c < s.c; ++c)
      m.row(c).segment(n * hw, hw) =
          Eigen::Map<const Eigen::RowVectorXd>(x.data() + x.offset(n, c, 0, 0), hw);
  return m;
}

}  // namespace

void require_finite(const FeatureMap& x, const char* what) {
  if (!x.all_finite()) {
    throw NumericError(std::string(what) + ": non-finite value");
  }
}

FeatureMap add(const FeatureMap& a, const FeatureMap& b) {
  require_same(a, b, "add");
  return FeatureMap(a.shape(), a.array() + b.array());
}

FeatureMap sub(const FeatureMap& a, const FeatureMap& b) {
  require_same(a, b, "sub");
  return FeatureMap(a.shape(), a.array() - b.array());
}

FeatureMap mul(const FeatureMap& a, const FeatureMap& b) {
  require_same(a, b, "mul");
  return FeatureMap(a.shape(), a.array() * b.array());
}

FeatureMap neg(const FeatureMap& a) { return FeatureMap(a.shape(), -a.array()); }

FeatureMap exp(const FeatureMap& a) {
  FeatureMap out(a.shape(), a.array().exp().eval());
  require_finite(out, "exp");
  return out;
}

FeatureMap scale(const FeatureMap& a, double s) {
  return FeatureMap(a.shape(), a.array() * s);
}

FeatureMap leaky_relu(const FeatureMap& x, double slope) {
  return FeatureMap(x.shape(),
                    (x.array() >= 0.0).select(x.array(), slope * x.array()));
}

FeatureMap clamp_scale(const FeatureMap& raw, double bound) {
  return FeatureMap(raw.shape(), bound * (0.5 * raw.array()).tanh());
}

FeatureMap conv2d(const FeatureMap& x, const FeatureMap& kernel,
                  const FeatureMap& bias) {
  const ConvGeometry g = conv_geometry(x.shape(), kernel.shape(), &bias.shape());
  const RowMatrix col = im2col(x, g);
  RowMatrix out = kernel_matrix(kernel) * col;
  const Index hw = g.h * g.w;
  FeatureMap y({g.n, g.cout, g.h, g.w});
  for (Index n = 0; n < g.n; ++n) {
    for (Index o = 0; o < g.cout; ++o) {
      Eigen::Map<Eigen::RowVectorXd>(y.data() + y.offset(n, o, 0, 0), hw) =
          out.row(o).segment(n * hw, hw).array() + bias.data()[o];
    }
  }
  return y;
}

FeatureMap conv2d(const FeatureMap& x, const Parameter& kernel,
                  const Parameter& bias) {
  return conv2d(x, kernel.value, bias.value);
}

Conv2dGrads conv2d_backward(const FeatureMap& x, const FeatureMap& kernel,
                            const FeatureMap& grad_out) {
  const ConvGeometry g = conv_geometry(x.shape(), kernel.shape(), nullptr);
  const RowMatrix gout = channels_by_pixels(grad_out);
  const RowMatrix col = im2col(x, g);
  Conv2dGrads grads;
  RowMatrix gk = gout * col.transpose();
  grads.kernel = FeatureMap(kernel.shape(),
                            Eigen::Map<const Eigen::ArrayXd>(gk.data(), gk.size()));
  grads.bias = FeatureMap({1, g.cout, 1, 1}, gout.rowwise().sum().array());
  const RowMatrix gcol = kernel_matrix(kernel).transpose() * gout;
  grads.input = col2im(gcol, g);
  return grads;
}

FeatureMap concat_channels(const std::vector<FeatureMap>& parts) {
  return concat_channels<double>(parts);
}

FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b) {
  return concat_channels<double>(a, b);
}

FeatureMap sum(const FeatureMap& x) {
  return FeatureMap({1, 1, 1, 1}, x.array().sum());
}

FeatureMap mean(const FeatureMap& x) {
  return FeatureMap({1, 1, 1, 1}, x.array().mean());
}

FeatureMap mse(const FeatureMap& x, const FeatureMap& target) {
  require_same(x, target, "mse");
  return FeatureMap({1, 1, 1, 1}, (x.array() - target.array()).square().mean());
}

FeatureMap l1(const FeatureMap& x, const FeatureMap& target) {
  require_same(x, target, "l1");
  return FeatureMap({1, 1, 1, 1}, (x.array() - target.array()).abs().mean());
}

// --- traced -----------------------------------------------------------------

namespace {

Tape& common_tape(const Var& a, const Var& b, const char* op) {
  if (&a.tape() != &b.tape()) {
    throw UsageError(std::string(op) + ": operands live on different tapes");
  }
  return a.tape();
}

}  // namespace

Var add(const Var& a, const Var& b) {
  Tape& t = common_tape(a, b, "add");
  return t.record(add(a.value(), b.value()), {a, b},
                  [a, b](Tape& tape, const FeatureMap& g) {
                    tape.accumulate(a, g);
                    tape.accumulate(b, g);
                  });
}

Var sub(const Var& a, const Var& b) {
  Tape& t = common_tape(a, b, "sub");
  return t.record(sub(a.value(), b.value()), {a, b},
                  [a, b](Tape& tape, const FeatureMap& g) {
                    tape.accumulate(a, g);
                    tape.accumulate(b, neg(g));
                  });
}

Var mul(const Var& a, const Var& b) {
  Tape& t = common_tape(a, b, "mul");
  return t.record(mul(a.value(), b.value()), {a, b},
                  [a, b](Tape& tape, const FeatureMap& g) {
                    if (tape.requires_grad(a)) tape.accumulate(a, mul(g, b.value()));
                    if (tape.requires_grad(b)) tape.accumulate(b, mul(g, a.value()));
                  });
}

Var neg(const Var& a) {
  return a.tape().record(neg(a.value()), {a},
                         [a](Tape& tape, const FeatureMap& g) {
                           tape.accumulate(a, neg(g));
                         });
}

Var exp(const Var& a) {
  return a.tape().record(exp(a.value()), {a},
                         [a](Tape& tape, const FeatureMap& g) {
                           tape.accumulate(a, mul(g, exp(a.value())));
                         });
}

Var scale(const Var& a, double s) {
  return a.tape().record(scale(a.value(), s), {a},
                         [a, s](Tape& tape, const FeatureMap& g) {
                           tape.accumulate(a, scale(g, s));
                         });
}

Var leaky_relu(const Var& x, double slope) {
  return x.tape().record(
      leaky_relu(x.value(), slope), {x},
      [x, slope](Tape& tape, const FeatureMap& g) {
        const auto& v = x.value().array();
        tape.accumulate(x, FeatureMap(g.shape(),
                                      (v >= 0.0).select(g.array(), slope * g.array())));
      });
}

Var clamp_scale(const Var& raw, double bound) {
  return raw.tape().record(
      clamp_scale(raw.value(), bound), {raw},
      [raw, bound](Tape& tape, const FeatureMap& g) {
        const Eigen::ArrayXd t = (0.5 * raw.value().array()).tanh();
        tape.accumulate(raw, FeatureMap(g.shape(),
                                        g.array() * (0.5 * bound) * (1.0 - t.square())));
      });
}

Var conv2d(const Var& x, const Var& kernel, const Var& bias) {
  Tape& t = common_tape(x, kernel, "conv2d");
  return t.record(
      conv2d(x.value(), kernel.value(), bias.value()), {x, kernel, bias},
      [x, kernel, bias](Tape& tape, const FeatureMap& g) {
        Conv2dGrads grads = conv2d_backward(x.value(), kernel.value(), g);
        tape.accumulate(x, std::move(grads.input));
        tape.accumulate(kernel, std::move(grads.kernel));
        tape.accumulate(bias, FeatureMap(bias.shape(), grads.bias.array()));
      });
}

Var conv2d(const Var& x, const Parameter& kernel, const Parameter& bias) {
  Tape& t = x.tape();
  return conv2d(x, t.leaf(kernel), t.leaf(bias));
}

Var concat_channels(const std::vector<Var>& parts) {
  if (parts.empty()) throw StructuralError("concat_channels: no inputs");
  Tape& t = parts.front().tape();
  std::vector<FeatureMap> values;
  values.reserve(parts.size());
  for (const Var& p : parts) values.push_back(p.value());
  return t.record(concat_channels(values), parts,
                  [parts](Tape& tape, const FeatureMap& g) {
                    Index at = 0;
                    for (const Var& p : parts) {
                      const Index c = p.channels();
                      if (tape.requires_grad(p)) {
                        tape.accumulate(p, slice_channels(g, at, c));
                      }
                      at += c;
                    }
                  });
}

Var concat_channels(const Var& a, const Var& b) {
  return concat_channels(std::vector<Var>{a, b});
}

Var slice_channels(const Var& x, Index begin, Index count) {
  return x.tape().record(
      slice_channels(x.value(), begin, count), {x},
      [x, begin, count](Tape& tape, const FeatureMap& g) {
        const Shape& s = x.shape();
        FeatureMap full(s);
        const Index block = count * s.plane();
        for (Index n = 0; n < s.n; ++n) {
          full.array().segment(full.offset(n, begin, 0, 0), block) =
              g.array().segment(n * block, block);
        }
        tape.accumulate(x, std::move(full));
      });
}

Var sum(const Var& x) {
  return x.tape().record(sum(x.value()), {x},
                         [x](Tape& tape, const FeatureMap& g) {
                           tape.accumulate(x, FeatureMap(x.shape(), g.item()));
                         });
}

Var mean(const Var& x) {
  return x.tape().record(
      mean(x.value()), {x}, [x](Tape& tape, const FeatureMap& g) {
        const double n = static_cast<double>(x.value().size());
        tape.accumulate(x, FeatureMap(x.shape(), g.item() / n));
      });
}

Var abs(const Var& x) {
  return x.tape().record(
      FeatureMap(x.shape(), x.value().array().abs().eval()), {x},
      [x](Tape& tape, const FeatureMap& g) {
        tape.accumulate(x, FeatureMap(g.shape(),
                                      g.array() * x.value().array().sign()));
      });
}

Var square(const Var& x) {
  return x.tape().record(
      FeatureMap(x.shape(), x.value().array().square().eval()), {x},
      [x](Tape& tape, const FeatureMap& g) {
        tape.accumulate(x, FeatureMap(g.shape(),
                                      2.0 * g.array() * x.value().array()));
      });
}

Var mse(const Var& x, const FeatureMap& target) {
  return x.tape().record(
      mse(x.value(), target), {x}, [x, target](Tape& tape, const FeatureMap& g) {
        const double n = static_cast<double>(target.size());
        tape.accumulate(x, FeatureMap(target.shape(),
                                      (2.0 * g.item() / n) *
                                          (x.value().array() - target.array())));
      });
}

Var l1(const Var& x, const FeatureMap& target) {
  return x.tape().record(
      l1(x.value(), target), {x}, [x, target](Tape& tape, const FeatureMap& g) {
        const double n = static_cast<double>(target.size());
        tape.accumulate(x, FeatureMap(target.shape(),
                                      (g.item() / n) *
                                          (x.value().array() - target.array()).sign()));
      });
}

SubbandVars haar_forward(const Var& x) {
  Tape& t = x.tape();
  SubbandStack s = haar_forward(x.value());
  // The two outputs share one joint node so the adjoint runs once.
  const Index c = s.ll.channels();
  Var joint = t.record(concat_channels(s.ll, s.details), {x},
                       [x, c](Tape& tape, const FeatureMap& g) {
                         tape.accumulate(x, haar_forward_adjoint(
                                                slice_channels(g, 0, c),
                                                slice_channels(g, c, 3 * c)));
                       });
  return {slice_channels(joint, 0, c), slice_channels(joint, c, 3 * c)};
}

Var haar_inverse(const Var& ll, const Var& details) {
  Tape& t = common_tape(ll, details, "haar_inverse");
  return t.record(haar_inverse(ll.value(), details.value()), {ll, details},
                  [ll, details](Tape& tape, const FeatureMap& g) {
                    SubbandStack s = haar_inverse_adjoint(g);
                    tape.accumulate(ll, std::move(s.ll));
                    tape.accumulate(details, std::move(s.details));
                  });
}

LumaChromaVars rgb_to_ycbcr(const Var& rgb) {
  const Eigen::Matrix3d m = color::rgb_to_ycbcr_matrix<double>();
  Var ycc = rgb.tape().record(mix_channels(rgb.value(), m), {rgb},
                              [rgb, m](Tape& tape, const FeatureMap& g) {
                                tape.accumulate(rgb, mix_channels(g, Eigen::Matrix3d(m.transpose())));
                              });
  return {slice_channels(ycc, 0, 1), slice_channels(ycc, 1, 2)};
}

Var ycbcr_to_rgb(const Var& y, const Var& c) {
  if (y.channels() != 1 || c.channels() != 2) {
    throw StructuralError("ycbcr_to_rgb: expected 1 luma and 2 chroma channels");
  }
  const Eigen::Matrix3d m = color::ycbcr_to_rgb_matrix<double>();
  Var ycc = concat_channels(y, c);
  return ycc.tape().record(mix_channels(ycc.value(), m), {ycc},
                           [ycc, m](Tape& tape, const FeatureMap& g) {
                             tape.accumulate(ycc, mix_channels(g, Eigen::Matrix3d(m.transpose())));
                           });
}

Var pixel_unshuffle(const Var& x, Index r) {
  return x.tape().record(pixel_unshuffle(x.value(), r), {x},
                         [x, r](Tape& tape, const FeatureMap& g) {
                           tape.accumulate(x, pixel_shuffle(g, r));
                         });
}

Var pixel_shuffle(const Var& x, Index r) {
  return x.tape().record(pixel_shuffle(x.value(), r), {x},
                         [x, r](Tape& tape, const FeatureMap& g) {
                           tape.accumulate(x, pixel_unshuffle(g, r));
                         });
}

}  // namespace tinv
