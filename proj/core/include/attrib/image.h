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

#ifndef ATTRIB_IMAGE_H_
#define ATTRIB_IMAGE_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace attrib {

// A dense H x W field of reals, row-major. Used for masks, heatmaps and
// gradient planes.
class Field {
 public:
  Field() = default;
  Field(int height, int width, double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int row, int col) {
    return data_[static_cast<std::size_t>(row) * width_ + col];
  }
  double operator()(int row, int col) const {
    return data_[static_cast<std::size_t>(row) * width_ + col];
  }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const Field& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  double min() const;
  double max() const;
  double sum() const;

  friend bool operator==(const Field&, const Field&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

// H x W x 3 color image with intensities in [0,1], channel-interleaved.
class Image {
 public:
  static constexpr int kChannels = 3;

  Image() = default;
  Image(int height, int width, double fill = 0.0);

  // Constant image of one color.
  static Image Filled(int height, int width, double r, double g, double b);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return kChannels; }
  std::size_t size() const { return data_.size(); }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height_) * width_;
  }
  bool empty() const { return data_.empty(); }

  double& operator()(int row, int col, int ch) {
    return data_[(static_cast<std::size_t>(row) * width_ + col) * kChannels +
                 ch];
  }
  double operator()(int row, int col, int ch) const {
    return data_[(static_cast<std::size_t>(row) * width_ + col) * kChannels +
                 ch];
  }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }
  bool same_spatial(const Field& field) const {
    return height_ == field.height() && width_ == field.width();
  }

  // One channel as a Field.
  Field channel(int ch) const;
  void set_channel(int ch, const Field& plane);

  // Throws ShapeError unless every value is finite and within [0,1].
  void validate() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

enum class MaskKind { kContinuous, kBinary };

// Spatial perturbation mask. Value 1 means "replace with filler".
class PerturbMask {
 public:
  PerturbMask() = default;
  PerturbMask(Field values, MaskKind kind);

  static PerturbMask Zeros(int height, int width, MaskKind kind = MaskKind::kBinary);
  static PerturbMask Ones(int height, int width, MaskKind kind = MaskKind::kBinary);

  // Axis-aligned rectangle of ones; rows [top, top+h), cols [left, left+w).
  static PerturbMask Rectangle(int height, int width, int top, int left,
                               int rect_h, int rect_w);

  const Field& values() const { return values_; }
  MaskKind kind() const { return kind_; }
  int height() const { return values_.height(); }
  int width() const { return values_.width(); }
  double operator()(int row, int col) const { return values_(row, col); }
  double operator[](std::size_t i) const { return values_[i]; }

  // Binary copy with value 1 wherever this mask is >= threshold.
  PerturbMask Binarized(double threshold = 0.5) const;
  std::size_t CountOnes() const;

 private:
  Field values_;
  MaskKind kind_ = MaskKind::kContinuous;
};

struct Provenance {
  std::string method;
  std::map<std::string, std::string> params;
};

// Raw attribution scores. Normalization is always a separate view.
class AttributionMap {
 public:
  AttributionMap() = default;
  explicit AttributionMap(Field values, Provenance provenance = {});

  const Field& values() const { return values_; }
  Field& mutable_values() { return values_; }
  const Provenance& provenance() const { return provenance_; }
  Provenance& mutable_provenance() { return provenance_; }
  int height() const { return values_.height(); }
  int width() const { return values_.width(); }

  // Values divided by the max absolute value, in [-1,1]. An all-zero map
  // stays all-zero.
  Field Normalized() const;
  // Values rescaled to [0,1] by min-max; constant maps become all-zero.
  Field MinMaxNormalized() const;

 private:
  Field values_;
  Provenance provenance_;
};

// Inclusive pixel box.
struct BoundingBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const { return x_max - x_min + 1; }
  int height() const { return y_max - y_min + 1; }
  long long area() const {
    return static_cast<long long>(width()) * height();
  }
  bool Contains(int x, int y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }

  static BoundingBox Full(int height, int width) {
    return {0, 0, width - 1, height - 1};
  }
  // Throws ParameterError unless ordered and inside an H x W image.
  void Validate(int height, int width) const;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

}  // namespace attrib

#endif  // ATTRIB_IMAGE_H_
