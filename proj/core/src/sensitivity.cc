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

#include "attrib/sensitivity.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "attrib/error.h"
#include "attrib/parallel.h"
#include "attrib/similarity.h"

namespace attrib {
namespace {

// Sum in sorted order so the result does not depend on input order.
double SortedMean(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double SortedSampleStd(std::vector<double> v, double mean) {
  if (v.size() < 2) return 0.0;
  std::vector<double> sq;
  sq.reserve(v.size());
  for (double x : v) sq.push_back((x - mean) * (x - mean));
  std::sort(sq.begin(), sq.end());
  double s = 0.0;
  for (double x : sq) s += x;
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

const char* MethodName(SweepMethod m) {
  switch (m) {
    case SweepMethod::kSp:
      return "SP";
    case SweepMethod::kLime:
      return "LIME";
    case SweepMethod::kMp2:
      return "MP2";
  }
  return "?";
}

}  // namespace

std::vector<int> DefaultAxisValues(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kPatchSizes:
      return {5, 17, 29, 41, 53};
    case SweepAxis::kRandomSeeds:
      return {0, 1, 2, 3, 4};
    case SweepAxis::kMaskSizes:
      return {28, 56, 112};
  }
  return {};
}

SweepAxis AxisFor(SweepMethod method) {
  switch (method) {
    case SweepMethod::kSp:
      return SweepAxis::kPatchSizes;
    case SweepMethod::kLime:
      return SweepAxis::kRandomSeeds;
    case SweepMethod::kMp2:
      return SweepAxis::kMaskSizes;
  }
  return SweepAxis::kPatchSizes;
}

std::string SweepMethodLabel(SweepMethod method, const FillStrategy& filler) {
  const std::string name = filler.name();
  const bool generative = name.rfind("inpaint", 0) == 0;
  return std::string(MethodName(method)) + (generative ? "-G" : "");
}

std::vector<Field> SweepHeatmaps(const SweepItem& item, const SweepSpec& spec,
                                 const ClassifierOracle& oracle,
                                 std::shared_ptr<const FillStrategy> filler) {
  std::vector<Field> maps;
  for (int v : spec.values) {
    switch (spec.method) {
      case SweepMethod::kSp: {
        SpConfig c = spec.sp;
        c.patch = v;
        c.filler = filler;
        c.target_class = item.label;
        maps.push_back(SpAttribute(item.image, oracle, c).values());
        break;
      }
      case SweepMethod::kLime: {
        LimeConfig c = spec.lime;
        c.seed = static_cast<std::uint64_t>(v);
        c.filler = filler;
        c.target_class = item.label;
        c.keep_images = false;
        maps.push_back(LimeAttribute(item.image, oracle, c).map.values());
        break;
      }
      case SweepMethod::kMp2: {
        Mp2Config c = spec.mp2;
        c.mask_size = v;
        c.filler = filler;
        c.target_class = item.label;
        maps.push_back(Mp2Attribute(item.image, oracle, c).map.values());
        break;
      }
    }
  }
  return maps;
}

SweepResult RunSweep(std::span<const SweepItem> items, const SweepSpec& spec,
                     const ClassifierOracle& oracle,
                     std::shared_ptr<const FillStrategy> filler) {
  if (items.empty()) throw ParameterError("sweep: no images");
  if (!filler) throw ParameterError("sweep: no filler");
  if (spec.axis != AxisFor(spec.method)) {
    throw ParameterError(std::string("sweep: axis does not match method ") +
                         MethodName(spec.method));
  }
  const int k = static_cast<int>(spec.values.size());
  if (k < 2) throw ParameterError("sweep: need at least 2 axis values");

  SweepResult result;
  result.method = SweepMethodLabel(spec.method, *filler);
  result.pairs_per_image = k * (k - 1) / 2;
  for (auto& v : result.per_image) v.assign(items.size(), 0.0);

  // Per-image work is independent; heatmap generation inside stays serial.
  SweepSpec inner = spec;
  inner.sp.threads = 1;
  inner.lime.threads = 1;
  ParallelFor(items.size(), spec.threads, [&](std::size_t i) {
    const std::vector<Field> maps = SweepHeatmaps(items[i], inner, oracle, filler);
    std::array<double, kSweepMetrics> sums{};
    for (int a = 0; a < k; ++a) {
      for (int b = a + 1; b < k; ++b) {
        sums[0] += HeatmapSsim(maps[a], maps[b]);
        sums[1] += HeatmapHogPearson(maps[a], maps[b]);
        sums[2] += Spearman(maps[a], maps[b]);
      }
    }
    for (int m = 0; m < kSweepMetrics; ++m) {
      result.per_image[m][i] = sums[m] / result.pairs_per_image;
    }
  });
  for (int m = 0; m < kSweepMetrics; ++m) {
    result.mean[m] = SortedMean(result.per_image[m]);
    result.stddev[m] = SortedSampleStd(result.per_image[m], result.mean[m]);
  }
  return result;
}

void WriteSweepCsv(std::span<const SweepResult> results,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  for (const SweepResult& r : results) {
    out << "# " << r.method << ": pairs_per_image=" << r.pairs_per_image
        << " images=" << r.per_image[0].size() << '\n';
  }
  out << "# ssim: uniform 7x7 window, K1=0.01, K2=0.03, sample covariance, "
         "data range = joint max-min after per-map min-max normalization\n"
      << "# hog_pearson: 9 unsigned bins, 8x8 cells, 2x2 blocks stride 1, "
         "L2 block norm eps=1e-5, centered differences\n"
      << "# spearman: average ranks for ties\n"
      << "method,metric,mean,std\n";
  for (const SweepResult& r : results) {
    for (int m = 0; m < kSweepMetrics; ++m) {
      out << r.method << ',' << kSweepMetricNames[m] << ',' << r.mean[m] << ','
          << r.stddev[m] << '\n';
    }
  }
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace attrib
