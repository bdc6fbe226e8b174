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

#ifndef ATTRIB_SENSITIVITY_H_
#define ATTRIB_SENSITIVITY_H_

#include <array>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "attrib/fillers.h"
#include "attrib/image.h"
#include "attrib/lime.h"
#include "attrib/mask_opt.h"
#include "attrib/oracle.h"
#include "attrib/sliding_patch.h"

namespace attrib {

enum class SweepMethod { kSp, kLime, kMp2 };
enum class SweepAxis { kPatchSizes, kRandomSeeds, kMaskSizes };

// {5,17,29,41,53} / seeds {0,...,4} / {28,56,112}.
std::vector<int> DefaultAxisValues(SweepAxis axis);
// Axis each method is swept along.
SweepAxis AxisFor(SweepMethod method);

struct SweepSpec {
  SweepMethod method = SweepMethod::kSp;
  SweepAxis axis = SweepAxis::kPatchSizes;
  std::vector<int> values;  // one heatmap per value; k = values.size()
  // Base configurations; the swept field is overwritten per value and the
  // filler comes from run_sweep's argument.
  SpConfig sp;
  LimeConfig lime = [] {
    LimeConfig c;
    c.num_samples = 500;
    return c;
  }();
  Mp2Config mp2;
  int threads = 1;
};

inline constexpr int kSweepMetrics = 3;
inline constexpr std::array<const char*, kSweepMetrics> kSweepMetricNames = {
    "ssim", "hog_pearson", "spearman"};

struct SweepItem {
  Image image;
  int label = 0;
};

struct SweepResult {
  std::string method;  // "SP", "SP-G", "LIME", ...
  int pairs_per_image = 0;
  // per_image[m][i]: mean over pairs of metric m on image i.
  std::array<std::vector<double>, kSweepMetrics> per_image;
  std::array<double, kSweepMetrics> mean{};
  std::array<double, kSweepMetrics> stddev{};  // sample std across images
};

// Method label with "-G" appended when the filler is an inpainter.
std::string SweepMethodLabel(SweepMethod method, const FillStrategy& filler);

// Heatmaps for every axis value of one image.
std::vector<Field> SweepHeatmaps(const SweepItem& item, const SweepSpec& spec,
                                 const ClassifierOracle& oracle,
                                 std::shared_ptr<const FillStrategy> filler);

// Per image: all k(k-1)/2 heatmap pairs scored by every metric and averaged;
// then mean and sample std across images (order-independent).
SweepResult RunSweep(std::span<const SweepItem> items, const SweepSpec& spec,
                     const ClassifierOracle& oracle,
                     std::shared_ptr<const FillStrategy> filler);

// CSV "method,metric,mean,std" preceded by '#' lines recording the pair
// count and the metric parameters.
void WriteSweepCsv(std::span<const SweepResult> results,
                   const std::filesystem::path& path);

}  // namespace attrib

#endif  // ATTRIB_SENSITIVITY_H_
