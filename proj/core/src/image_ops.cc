// Copyright 2026 The attrib Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "attrib/image_ops.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "attrib/error.h"

namespace attrib {

Image Composite(const Image& x, const Field& mask, const Image& filler) {
  if (!x.same_shape(filler) || !x.same_spatial(mask)) {
    std::ostringstream os;
    os << "composite: image " << x.height() << "x" << x.width() << ", mask "
       << mask.height() << "x" << mask.width() << ", filler "
       << filler.height() << "x" << filler.width();
    throw ShapeError(os.str());
  }
  Image out(x.height(), x.width());
  for (std::size_t p = 0; p < x.pixel_count(); ++p) {
    const double m = mask[p];
    for (int ch = 0; ch < 3; ++ch) {
      const std::size_t i = p * 3 + ch;
      const double v = x[i] * (1.0 - m) + filler[i] * m;
      out[i] = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

int ReflectIndex(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

std::vector<double> GaussianKernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ParameterError("gaussian blur requires sigma > 0");
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double total = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    const double w = std::exp(-0.5 * (t * t) / (sigma * sigma));
    k[t + radius] = w;
    total += w;
  }
  for (double& w : k) w /= total;
  return k;
}

namespace {

// Blurs 'planes' interleaved channels of an h x w buffer in place.
void BlurInterleaved(std::vector<double>& buf, int h, int w, int planes,
                     const std::vector<double>& kernel) {
  const int radius = static_cast<int>(kernel.size() / 2);
  std::vector<double> tmp(buf.size());
  std::vector<int> col_idx(w + 2 * radius), row_idx(h + 2 * radius);
  for (int t = 0; t < w + 2 * radius; ++t) col_idx[t] = ReflectIndex(t - radius, w);
  for (int t = 0; t < h + 2 * radius; ++t) row_idx[t] = ReflectIndex(t - radius, h);

  for (int r = 0; r < h; ++r) {
    const double* src = buf.data() + static_cast<std::size_t>(r) * w * planes;
    double* dst = tmp.data() + static_cast<std::size_t>(r) * w * planes;
    for (int c = 0; c < w; ++c) {
      for (int p = 0; p < planes; ++p) {
        double acc = 0.0;
        for (int t = 0; t < static_cast<int>(kernel.size()); ++t) {
          acc += kernel[t] * src[col_idx[c + t] * planes + p];
        }
        dst[c * planes + p] = acc;
      }
    }
  }
  const std::size_t row_len = static_cast<std::size_t>(w) * planes;
  for (int r = 0; r < h; ++r) {
    double* dst = buf.data() + r * row_len;
    for (std::size_t j = 0; j < row_len; ++j) {
      double acc = 0.0;
      for (int t = 0; t < static_cast<int>(kernel.size()); ++t) {
        acc += kernel[t] * tmp[row_idx[r + t] * row_len + j];
      }
      dst[j] = acc;
    }
  }
}

}  // namespace

Image GaussianBlur(const Image& x, double sigma) {
  const auto kernel = GaussianKernel(sigma);
  std::vector<double> buf(x.values().begin(), x.values().end());
  if (!x.empty()) BlurInterleaved(buf, x.height(), x.width(), 3, kernel);
  Image out(x.height(), x.width());
  for (std::size_t i = 0; i < buf.size(); ++i) out[i] = std::clamp(buf[i], 0.0, 1.0);
  return out;
}

Field GaussianBlur(const Field& x, double sigma) {
  const auto kernel = GaussianKernel(sigma);
  std::vector<double> buf(x.values().begin(), x.values().end());
  if (!x.empty()) BlurInterleaved(buf, x.height(), x.width(), 1, kernel);
  Field out(x.height(), x.width());
  for (std::size_t i = 0; i < buf.size(); ++i) out[i] = buf[i];
  return out;
}

std::vector<BilinearResizer::Tap> BilinearResizer::Taps(int in, int out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / out;
  for (int i = 0; i < out; ++i) {
    double src = (i + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const int lo = static_cast<int>(std::floor(src));
    const int hi = std::min(lo + 1, in - 1);
    taps[i] = {lo, hi, src - lo};
  }
  return taps;
}

BilinearResizer::BilinearResizer(int in_h, int in_w, int out_h, int out_w)
    : in_h_(in_h), in_w_(in_w), out_h_(out_h), out_w_(out_w) {
  if (in_h < 1 || in_w < 1) throw ShapeError("bilinear resize of an empty field");
  if (out_h < 1 || out_w < 1) throw ShapeError("bilinear resize to an empty field");
  rows_ = Taps(in_h, out_h);
  cols_ = Taps(in_w, out_w);
}

Field BilinearResizer::Apply(const Field& src) const {
  if (src.height() != in_h_ || src.width() != in_w_) {
    throw ShapeError("bilinear resize: input size mismatch");
  }
  Field out(out_h_, out_w_);
  for (int r = 0; r < out_h_; ++r) {
    const Tap& tr = rows_[r];
    for (int c = 0; c < out_w_; ++c) {
      const Tap& tc = cols_[c];
      const double top = (1.0 - tc.w_hi) * src(tr.lo, tc.lo) + tc.w_hi * src(tr.lo, tc.hi);
      const double bot = (1.0 - tc.w_hi) * src(tr.hi, tc.lo) + tc.w_hi * src(tr.hi, tc.hi);
      out(r, c) = (1.0 - tr.w_hi) * top + tr.w_hi * bot;
    }
  }
  return out;
}

Field BilinearResizer::ApplyAdjoint(const Field& grad) const {
  if (grad.height() != out_h_ || grad.width() != out_w_) {
    throw ShapeError("bilinear adjoint: gradient size mismatch");
  }
  Field out(in_h_, in_w_, 0.0);
  for (int r = 0; r < out_h_; ++r) {
    const Tap& tr = rows_[r];
    for (int c = 0; c < out_w_; ++c) {
      const Tap& tc = cols_[c];
      const double g = grad(r, c);
      const double gt = (1.0 - tr.w_hi) * g;
      const double gb = tr.w_hi * g;
      out(tr.lo, tc.lo) += (1.0 - tc.w_hi) * gt;
      out(tr.lo, tc.hi) += tc.w_hi * gt;
      out(tr.hi, tc.lo) += (1.0 - tc.w_hi) * gb;
      out(tr.hi, tc.hi) += tc.w_hi * gb;
    }
  }
  return out;
}

Field BilinearResize(const Field& src, int out_h, int out_w) {
  if (src.empty()) throw ShapeError("bilinear resize of an empty field");
  return BilinearResizer(src.height(), src.width(), out_h, out_w).Apply(src);
}

Image BilinearResize(const Image& src, int out_h, int out_w) {
  if (src.empty()) throw ShapeError("bilinear resize of an empty image");
  BilinearResizer resizer(src.height(), src.width(), out_h, out_w);
  Image out(out_h, out_w);
  for (int ch = 0; ch < 3; ++ch) {
    Field plane = resizer.Apply(src.channel(ch));
    for (double& v : plane.values()) v = std::clamp(v, 0.0, 1.0);
    out.set_channel(ch, plane);
  }
  return out;
}

namespace {

void CheckTau(int tau) {
  if (tau < 0 || tau > kMaxJitter) {
    throw ParameterError("jitter tau must be in [0, 4], got " + std::to_string(tau));
  }
}

}  // namespace

Image Jitter(const Image& x, int tau, JitterDirection direction) {
  CheckTau(tau);
  if (tau == 0) return x;
  Image out(x.height(), x.width());
  for (int r = 0; r < x.height(); ++r) {
    for (int c = 0; c < x.width(); ++c) {
      const int sr = direction == JitterDirection::kVertical ? std::max(r - tau, 0) : r;
      const int sc = direction == JitterDirection::kHorizontal ? std::max(c - tau, 0) : c;
      for (int ch = 0; ch < 3; ++ch) out(r, c, ch) = x(sr, sc, ch);
    }
  }
  return out;
}

Image JitterAdjoint(const Image& grad, int tau, JitterDirection direction) {
  CheckTau(tau);
  if (tau == 0) return grad;
  Image out(grad.height(), grad.width(), 0.0);
  for (int r = 0; r < grad.height(); ++r) {
    for (int c = 0; c < grad.width(); ++c) {
      const int sr = direction == JitterDirection::kVertical ? std::max(r - tau, 0) : r;
      const int sc = direction == JitterDirection::kHorizontal ? std::max(c - tau, 0) : c;
      for (int ch = 0; ch < 3; ++ch) out(sr, sc, ch) += grad(r, c, ch);
    }
  }
  return out;
}

Image Crop(const Image& x, const BoundingBox& box) {
  box.Validate(x.height(), x.width());
  Image out(box.height(), box.width());
  for (int r = 0; r < box.height(); ++r) {
    for (int c = 0; c < box.width(); ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        out(r, c, ch) = x(box.y_min + r, box.x_min + c, ch);
      }
    }
  }
  return out;
}

Field Luminance(const Image& x) {
  Field out(x.height(), x.width());
  for (std::size_t p = 0; p < x.pixel_count(); ++p) {
    out[p] = 0.299 * x[p * 3] + 0.587 * x[p * 3 + 1] + 0.114 * x[p * 3 + 2];
  }
  return out;
}

}  // namespace attrib
