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

#ifndef ATTRIB_IMAGE_OPS_H_
#define ATTRIB_IMAGE_OPS_H_

#include <vector>

#include "attrib/image.h"

namespace attrib {

// x * (1 - m) + f * m, with the spatial mask broadcast over channels.
Image Composite(const Image& x, const Field& mask, const Image& filler);
inline Image Composite(const Image& x, const PerturbMask& mask,
                       const Image& filler) {
  return Composite(x, mask.values(), filler);
}

// Separable Gaussian blur. The kernel is truncated at +-ceil(3 sigma) and
// renormalized; borders use half-sample symmetric reflection.
Image GaussianBlur(const Image& x, double sigma);
Field GaussianBlur(const Field& x, double sigma);

// Normalized 1-D kernel used by GaussianBlur, length 2*ceil(3 sigma)+1.
std::vector<double> GaussianKernel(double sigma);

// Index into [0, n) under half-sample symmetric reflection.
int ReflectIndex(int i, int n);

// Bilinear resampling as an explicit linear operator (align-corners=false,
// source coordinates clamped to the valid range).
class BilinearResizer {
 public:
  BilinearResizer(int in_h, int in_w, int out_h, int out_w);

  int in_height() const { return in_h_; }
  int in_width() const { return in_w_; }
  int out_height() const { return out_h_; }
  int out_width() const { return out_w_; }

  Field Apply(const Field& src) const;
  // Transpose of Apply: scatters an output-sized field back to input size.
  Field ApplyAdjoint(const Field& grad) const;

 private:
  struct Tap {
    int lo;
    int hi;
    double w_hi;
  };
  static std::vector<Tap> Taps(int in, int out);

  int in_h_, in_w_, out_h_, out_w_;
  std::vector<Tap> rows_;
  std::vector<Tap> cols_;
};

Field BilinearResize(const Field& src, int out_h, int out_w);
Image BilinearResize(const Image& src, int out_h, int out_w);

enum class JitterDirection { kHorizontal, kVertical };

inline constexpr int kMaxJitter = 4;

// Translates right (horizontal) or down (vertical) by tau pixels; the vacated
// band replicates the first column or row. 0 <= tau <= 4.
Image Jitter(const Image& x, int tau, JitterDirection direction);
// Adjoint of Jitter, for back-propagating gradients.
Image JitterAdjoint(const Image& grad, int tau, JitterDirection direction);

// Crop of rows y_min..y_max and cols x_min..x_max (inclusive).
Image Crop(const Image& x, const BoundingBox& box);

// ITU-R BT.601 luma.
Field Luminance(const Image& x);

}  // namespace attrib

#endif  // ATTRIB_IMAGE_OPS_H_
