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

#ifndef ATTRIB_SUPERPIXEL_H_
#define ATTRIB_SUPERPIXEL_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "attrib/image.h"

namespace attrib {

// Partition of an H x W grid into superpixels labeled 0..count-1.
class Segmentation {
 public:
  Segmentation() = default;
  // Labels must cover 0..max contiguously; throws ShapeError otherwise.
  Segmentation(int height, int width, std::vector<int> labels);

  int height() const { return height_; }
  int width() const { return width_; }
  int count() const { return static_cast<int>(pixels_.size()); }
  int label(int row, int col) const {
    return labels_[static_cast<std::size_t>(row) * width_ + col];
  }
  const std::vector<int>& labels() const { return labels_; }
  // Flat (row-major) pixel indices of superpixel k, ascending.
  const std::vector<std::size_t>& pixels(int k) const { return pixels_[k]; }
  std::size_t area(int k) const { return pixels_[k].size(); }

  friend bool operator==(const Segmentation& a, const Segmentation& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ &&
           a.labels_ == b.labels_;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<int> labels_;
  std::vector<std::vector<std::size_t>> pixels_;
};

struct SlicOptions {
  int num_segments = 50;
  double compactness = 10.0;
  int iterations = 10;
};

// SLIC on RGB scaled to [0,100]. Grid seeds at spacing sqrt(HW/S), moved to
// the lowest-gradient pixel of their 3x3 neighborhood; search window of
// +-step; orphaned fragments are merged into their largest adjacent
// superpixel and labels are renumbered in row-major order of appearance.
Segmentation Slic(const Image& x, const SlicOptions& options = {});

// Binary full-resolution mask with 1 on the pixels of the listed superpixels.
PerturbMask SuperpixelMask(const Segmentation& seg, std::span<const int> subset);

// Binary mask with 1 on every superpixel k whose presence[k] is 0.
PerturbMask OcclusionMask(const Segmentation& seg,
                          std::span<const std::uint8_t> presence);

// Paints value[k] onto the pixels of superpixel k.
Field PaintSuperpixels(const Segmentation& seg, std::span<const double> values);

// Label sidecar: "SEGM" | u8 version=1 | u32le width | u32le height |
// u32le labels[w*h] row-major.
inline constexpr std::uint8_t kSegmentationVersion = 1;
std::vector<std::uint8_t> EncodeSegmentation(const Segmentation& seg);
Segmentation DecodeSegmentation(const std::vector<std::uint8_t>& bytes);
// Writes a PNG with one pseudo-random color per superpixel and the sidecar.
void WriteSegmentation(const Segmentation& seg,
                       const std::filesystem::path& png_path,
                       const std::filesystem::path& raw_path);

}  // namespace attrib

#endif  // ATTRIB_SUPERPIXEL_H_
