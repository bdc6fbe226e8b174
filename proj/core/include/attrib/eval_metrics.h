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

#ifndef ATTRIB_EVAL_METRICS_H_
#define ATTRIB_EVAL_METRICS_H_

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "attrib/fillers.h"
#include "attrib/image.h"
#include "attrib/oracle.h"
#include "attrib/sliding_patch.h"

namespace attrib {

// Tightest box around every pixel with A >= alpha * max(A). Falls back to
// the full image when max(A) <= 0.
BoundingBox DeriveBox(const Field& map, double alpha);

// |a n b| / |a u b| over inclusive pixel areas.
double Iou(const BoundingBox& a, const BoundingBox& b);

struct LocalizationResult {
  double alpha = 0.0;
  BoundingBox derived_box;
  double iou = 0.0;  // max over ground-truth boxes
  bool hit = false;  // iou >= 0.5
};

LocalizationResult Localize(const Field& map, std::span<const BoundingBox> truth,
                            double alpha);

struct LocalizationItem {
  Field map;
  std::vector<BoundingBox> boxes;
};

// Fraction of items whose best IoU is below 0.5.
double LocalizationError(std::span<const LocalizationItem> items, double alpha);

// 0, 0.05, ..., 0.95.
std::vector<double> DefaultAlphaGrid();

struct AlphaSelection {
  double alpha = 0.0;
  double error = 0.0;
  std::vector<double> errors;  // per grid value
};

// Grid value with the lowest error; ties resolve to the smaller alpha.
AlphaSelection SelectAlpha(std::span<const LocalizationItem> items,
                           std::span<const double> grid);

struct DeletionCurve {
  std::vector<double> fractions;      // removed fraction, starts at 0
  std::vector<double> probabilities;  // target probability at each point
  double auc = 0.0;
};

// Trapezoidal integral of y over x.
double Trapezoid(std::span<const double> x, std::span<const double> y);

// Blackens pixels in descending attribution order (ties row-major),
// step_pixels at a time, until none is left.
DeletionCurve DeletionMetric(const Image& x, const Field& map,
                             const ClassifierOracle& oracle, int target_class,
                             int step_pixels);

struct SaliencyResult {
  BoundingBox box;
  double area_fraction = 0.0;
  double crop_score = 0.0;
  double value = 0.0;  // log(max(a, 0.05)) - log(max(s, 1e-12))
};

SaliencyResult SaliencyMetric(const Image& x, const Field& map,
                              const ClassifierOracle& oracle, int target_class,
                              double alpha);

struct FillerItem {
  Image image;
  PerturbMask object_mask;
  int label = 0;
};

struct FillerRow {
  std::string filler;
  double accuracy = 0.0;
  double ms_ssim = 0.0;
  std::size_t count = 0;
};

// Fills each object mask with every strategy and reports the classifier's
// top-1 accuracy on the results and their mean MS-SSIM to the originals.
std::vector<FillerRow> CompareFillers(
    std::span<const FillerItem> items, const ClassifierOracle& oracle,
    std::span<const std::shared_ptr<const FillStrategy>> fillers,
    int threads = 1);

struct LabeledInput {
  Image image;
  int label = 0;
};

// Mean target probability over fully blurred images.
double FullBlurConfidence(std::span<const LabeledInput> items,
                          const ClassifierOracle& oracle, double sigma,
                          int threads = 1);

// Mean |s(x) - s(x_bar)| over patch positions that do not overlap the box.
// Returns 0 with a warning when no such position exists.
double OutsideBoxDrop(const Image& x, const BoundingBox& box,
                      const ClassifierOracle& oracle, const SpConfig& config);

// (label, count) of top-1 predictions, by count descending then label.
std::vector<std::pair<int, std::size_t>> LabelHistogram(
    std::span<const Image> samples, const ClassifierOracle& oracle,
    int threads = 1);

}  // namespace attrib

#endif  // ATTRIB_EVAL_METRICS_H_
