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

#include "attrib/image.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "attrib/error.h"

namespace attrib {

Field::Field(int height, int width, double fill)
    : height_(height), width_(width) {
  if (height < 0 || width < 0) throw ShapeError("negative field dimensions");
  data_.assign(static_cast<std::size_t>(height) * width, fill);
}

double Field::min() const {
  if (data_.empty()) return 0.0;
  return *std::min_element(data_.begin(), data_.end());
}

double Field::max() const {
  if (data_.empty()) return 0.0;
  return *std::max_element(data_.begin(), data_.end());
}

double Field::sum() const {
  return std::accumulate(data_.begin(), data_.end(), 0.0);
}

Image::Image(int height, int width, double fill)
    : height_(height), width_(width) {
  if (height < 0 || width < 0) throw ShapeError("negative image dimensions");
  data_.assign(static_cast<std::size_t>(height) * width * kChannels, fill);
}

Image Image::Filled(int height, int width, double r, double g, double b) {
  Image img(height, width);
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    img.data_[p * 3 + 0] = r;
    img.data_[p * 3 + 1] = g;
    img.data_[p * 3 + 2] = b;
  }
  return img;
}

Field Image::channel(int ch) const {
  Field out(height_, width_);
  for (std::size_t p = 0; p < pixel_count(); ++p) out[p] = data_[p * 3 + ch];
  return out;
}

void Image::set_channel(int ch, const Field& plane) {
  if (!same_spatial(plane)) throw ShapeError("channel plane size mismatch");
  for (std::size_t p = 0; p < pixel_count(); ++p) data_[p * 3 + ch] = plane[p];
}

void Image::validate() const {
  if (data_.size() != pixel_count() * kChannels) {
    throw ShapeError("image buffer does not match its dimensions");
  }
  for (double v : data_) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      std::ostringstream os;
      os << "image value " << v << " outside [0,1]";
      throw ShapeError(os.str());
    }
  }
}

PerturbMask::PerturbMask(Field values, MaskKind kind)
    : values_(std::move(values)), kind_(kind) {
  for (double v : values_.values()) {
    if (kind_ == MaskKind::kBinary) {
      if (v != 0.0 && v != 1.0) throw ParameterError("binary mask value not in {0,1}");
    } else if (!(v >= 0.0 && v <= 1.0)) {
      throw ParameterError("continuous mask value outside [0,1]");
    }
  }
}

PerturbMask PerturbMask::Zeros(int height, int width, MaskKind kind) {
  return PerturbMask(Field(height, width, 0.0), kind);
}

PerturbMask PerturbMask::Ones(int height, int width, MaskKind kind) {
  return PerturbMask(Field(height, width, 1.0), kind);
}

PerturbMask PerturbMask::Rectangle(int height, int width, int top, int left,
                                   int rect_h, int rect_w) {
  Field f(height, width, 0.0);
  const int r1 = std::min(height, top + rect_h);
  const int c1 = std::min(width, left + rect_w);
  for (int r = std::max(0, top); r < r1; ++r) {
    for (int c = std::max(0, left); c < c1; ++c) f(r, c) = 1.0;
  }
  return PerturbMask(std::move(f), MaskKind::kBinary);
}

PerturbMask PerturbMask::Binarized(double threshold) const {
  Field f(height(), width());
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = values_[i] >= threshold ? 1.0 : 0.0;
  }
  return PerturbMask(std::move(f), MaskKind::kBinary);
}

std::size_t PerturbMask::CountOnes() const {
  return static_cast<std::size_t>(std::count_if(
      values_.values().begin(), values_.values().end(),
      [](double v) { return v >= 0.5; }));
}

AttributionMap::AttributionMap(Field values, Provenance provenance)
    : values_(std::move(values)), provenance_(std::move(provenance)) {
  for (double v : values_.values()) {
    if (!std::isfinite(v)) throw MethodError("attribution map has non-finite values");
  }
}

Field AttributionMap::Normalized() const {
  Field out = values_;
  double peak = 0.0;
  for (double v : values_.values()) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return out;
  for (double& v : out.values()) v /= peak;
  return out;
}

Field AttributionMap::MinMaxNormalized() const {
  Field out(values_.height(), values_.width(), 0.0);
  const double lo = values_.min();
  const double hi = values_.max();
  if (!(hi > lo)) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (values_[i] - lo) / (hi - lo);
  }
  return out;
}

void BoundingBox::Validate(int height, int width) const {
  if (x_min > x_max || y_min > y_max || x_min < 0 || y_min < 0 ||
      x_max >= width || y_max >= height) {
    std::ostringstream os;
    os << "invalid box (" << x_min << "," << y_min << "," << x_max << ","
       << y_max << ") for a " << width << "x" << height << " image";
    throw ParameterError(os.str());
  }
}

}  // namespace attrib
