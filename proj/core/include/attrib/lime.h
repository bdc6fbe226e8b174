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

#ifndef ATTRIB_LIME_H_
#define ATTRIB_LIME_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "attrib/fillers.h"
#include "attrib/image.h"
#include "attrib/oracle.h"
#include "attrib/superpixel.h"

namespace attrib {

struct LimeConfig {
  int num_segments = 50;
  int num_samples = 1000;
  double kernel_width = 0.25;
  double lasso_lambda = 0.01;
  int fit_steps = 1000;
  double occlusion_prob = 0.5;
  std::uint64_t seed = 0;
  double compactness = 10.0;
  int slic_iterations = 10;
  // Gray for LIME, an inpainter for LIME-G. Null means the default gray.
  std::shared_ptr<const FillStrategy> filler;
  int target_class = 0;
  int threads = 1;
  // Keep every perturbed image in the returned samples (memory heavy).
  bool keep_images = false;
};

struct LimeSample {
  std::vector<std::uint8_t> presence;  // 1 = superpixel kept
  std::optional<Image> image;
  double score = 0.0;
  double weight = 0.0;
};

// Presence vectors: sample 0 keeps everything; in the others superpixel k of
// sample i is kept iff CounterUniform(seed, i * S + k) >= occlusion_prob.
std::vector<std::vector<std::uint8_t>> LimePresenceBatch(int num_superpixels,
                                                         int num_samples,
                                                         double occlusion_prob,
                                                         std::uint64_t seed);

// Builds, scores and weights num_samples perturbations of x.
std::vector<LimeSample> LimeSampleBatch(const Image& x, const Segmentation& seg,
                                        const ClassifierOracle& oracle,
                                        const LimeConfig& config,
                                        std::uint64_t seed);

struct LassoFit {
  double intercept = 0.0;
  std::vector<double> coefficients;
  // Objective after each coordinate-descent cycle (non-increasing).
  std::vector<double> objective;
};

// Minimizes sum_i w_i (y_i - a0 - z_i . a)^2 + lambda * |a|_1 by cyclic
// coordinate descent with soft-thresholding; a0 is unpenalized. Throws
// MethodError when no feature varies across weighted samples.
LassoFit WeightedLasso(const std::vector<std::vector<std::uint8_t>>& z,
                       std::span<const double> y, std::span<const double> w,
                       double lambda, int cycles);

struct LimeResult {
  AttributionMap map;
  Segmentation segmentation;
  LassoFit fit;
  std::vector<LimeSample> samples;
};

// Samples and fits on a given segmentation.
LimeResult LimeFit(const Image& x, const Segmentation& seg,
                   const ClassifierOracle& oracle, const LimeConfig& config);

// Segments x with SLIC, then LimeFit.
LimeResult LimeAttribute(const Image& x, const ClassifierOracle& oracle,
                         const LimeConfig& config);

// Writes samples.csv (index,presence,score,weight) and, for samples that
// kept their image, sample_<index>.png into dir.
void WriteLimeSamples(const LimeResult& result, const std::filesystem::path& dir);

}  // namespace attrib

#endif  // ATTRIB_LIME_H_
