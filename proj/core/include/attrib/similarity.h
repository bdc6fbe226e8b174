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

#ifndef ATTRIB_SIMILARITY_H_
#define ATTRIB_SIMILARITY_H_

#include <span>
#include <vector>

#include "attrib/image.h"

namespace attrib {

struct SsimOptions {
  int window = 7;  // uniform window, shrunk to the field size if larger
  double k1 = 0.01;
  double k2 = 0.03;
  // Dynamic range L; <= 0 means the joint max - min of both inputs.
  double data_range = 0.0;
};

// Mean windowed SSIM over all window positions (stride 1), with sample
// (n - 1) variances and covariance. If the data range is zero the result is
// 1 for bit-identical inputs and 0 otherwise, with a warning.
double Ssim(const Field& a, const Field& b, const SsimOptions& options = {});

// Mean over windows of the contrast-structure term only.
double SsimContrastStructure(const Field& a, const Field& b,
                             const SsimOptions& options);

struct MsSsimOptions {
  std::vector<double> weights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  int window = 7;
  double k1 = 0.01;
  double k2 = 0.03;
};

// Multi-scale SSIM on BT.601 luminance with data range 1. Scales are made by
// 2x2 averaging; negative per-scale terms are clamped to 0.
double MsSsim(const Image& x, const Image& y, const MsSsimOptions& options = {});

// HOG descriptor: centered differences (0 on the border), 9 unsigned
// orientation bins over [0, 180) with hard assignment of the gradient
// magnitude, 8x8 cells averaged over their pixels, 2x2-cell blocks with
// stride 1, each block scaled by 1 / sqrt(|v|^2 + 1e-10).
std::vector<double> HogDescriptor(const Field& f);

// Pearson correlation; zero-variance input gives 1 when both are
// zero-variance and equal, else 0, with a warning.
double Pearson(std::span<const double> a, std::span<const double> b);

double HogPearson(const Field& a, const Field& b);

// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> AverageRanks(std::span<const double> v);

// Pearson of average ranks; a constant input gives 0 with a warning.
double Spearman(const Field& a, const Field& b);

// Heatmap comparisons used by the sensitivity sweeps: both maps are min-max
// normalized to [0,1] first (Spearman is unaffected).
double HeatmapSsim(const Field& a, const Field& b);
double HeatmapHogPearson(const Field& a, const Field& b);

}  // namespace attrib

#endif  // ATTRIB_SIMILARITY_H_
