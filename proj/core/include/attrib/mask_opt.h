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

#ifndef ATTRIB_MASK_OPT_H_
#define ATTRIB_MASK_OPT_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "attrib/fillers.h"
#include "attrib/image.h"
#include "attrib/image_ops.h"
#include "attrib/oracle.h"

namespace attrib {

// sum_i |grad m_i|^beta with forward differences (zero past the far edges)
// and |.| the Euclidean norm of (dx, dy).
double TvNorm(const Field& m, double beta);
Field TvNormGradient(const Field& m, double beta);

struct JitterShift {
  int tau = 0;
  JitterDirection direction = JitterDirection::kHorizontal;
};

// The 9 distinct translations: identity, then tau = 1..4 horizontally and
// vertically.
std::vector<JitterShift> AllJitterShifts();

struct MpConfig {
  int mask_size = 28;
  double lambda1 = 0.01;
  double lambda2 = 0.2;
  double tv_beta = 3.0;
  int steps = 300;
  double lr = 0.1;
  int jitter_max = kMaxJitter;
  int jitter_batch = 4;
  // Use all 9 translations every step instead of a random batch.
  bool deterministic_jitter = false;
  double blur_sigma = 10.0;
  int target_class = 0;
  std::uint64_t seed = 0;
};

struct MpObjective {
  double total = 0.0;
  double l1 = 0.0;     // lambda1 * sum |m|
  double tv = 0.0;     // lambda2 * TV(m)
  double score = 0.0;  // mean score over the jitter batch
};

// Objective of a coarse mask for a fixed jitter batch; fills 'grad' (same
// shape as the mask) when non-null.
MpObjective MpEvaluate(const Image& x, const Image& blurred,
                       const ClassifierOracle& oracle, const MpConfig& config,
                       const Field& coarse, std::span<const JitterShift> batch,
                       Field* grad);

struct MpTraceRow {
  int step = 0;
  MpObjective objective;
  double mask_mean = 0.0;
};

struct MpResult {
  AttributionMap map;  // upsampled final mask
  Field mask;          // coarse mask
  std::vector<MpTraceRow> trace;
};

MpResult MpAttribute(const Image& x, const ClassifierOracle& oracle,
                     const MpConfig& config);

enum class Mp2Selection { kLargestMagnitude, kMostNegative };

struct Mp2Config {
  int mask_size = 28;
  int pixels_per_step = 2;
  double stop_prob = 0.001;
  // Growth iterations allowed; <= 0 means mask_size^2 / pixels_per_step.
  int max_steps = 0;
  // Blur(10) for MP2, an inpainter for MP2-G. Null means blur(10).
  std::shared_ptr<const FillStrategy> filler;
  int target_class = 0;
  Mp2Selection selection = Mp2Selection::kLargestMagnitude;
  // Checkerboard block of DenseFill; <= 0 means DefaultProbeBlock.
  int probe_block = 0;
};

struct Mp2TraceRow {
  int iteration = 0;
  double probability = 0.0;
  std::size_t ones = 0;
};

struct Mp2Result {
  AttributionMap map;   // upsampled final mask
  Field mask;           // binary coarse mask
  bool converged = false;
  int iterations = 0;   // growth steps taken before stopping
  std::vector<Mp2TraceRow> trace;
  std::vector<int> selected;  // flat coarse indices in selection order
};

// Image seen by the classifier for coarse mask m:
// composite(x, U m, DenseFill(x, binarize(U m))). Also returns the filler
// image. probe_block <= 0 selects DefaultProbeBlock.
Image Mp2Perturbed(const Image& x, const Field& coarse,
                   const FillStrategy& filler, int probe_block = 0,
                   Image* fill_out = nullptr);

// d s(Mp2Perturbed(x, m)) / dm with the filler held fixed.
Field Mp2MaskGradient(const Image& x, const Field& coarse,
                      const ClassifierOracle& oracle,
                      const FillStrategy& filler, int target_class,
                      int probe_block = 0);

Mp2Result Mp2Attribute(const Image& x, const ClassifierOracle& oracle,
                       const Mp2Config& config);

struct FidoConfig {
  int mask_size = 56;
  double lr = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double reg = 0.001;
  int steps = 300;
  double init = 0.5;
  // Infills the discarded region. Null means the builtin inpainter.
  std::shared_ptr<const FillStrategy> filler;
  int target_class = 0;
  int probe_block = 0;  // as Mp2Config
};

struct FidoTraceRow {
  int step = 0;
  double objective = 0.0;
  double probability = 0.0;
  double kept = 0.0;  // sum of the coarse keep mask
};

struct FidoResult {
  AttributionMap map;  // upsampled keep mask
  Field keep;          // coarse keep mask
  std::vector<FidoTraceRow> trace;
};

// Preservation objective: -s(x_bar) + reg * |keep|_1, where x_bar keeps the
// pixels selected by the keep mask and infills the rest.
FidoResult FidoAttribute(const Image& x, const ClassifierOracle& oracle,
                         const FidoConfig& config);

// Trace CSVs: step,total,l1,tv,score,mask_mean / iteration,probability,ones /
// step,objective,probability,kept.
void WriteMpTrace(const MpResult& result, const std::filesystem::path& path);
void WriteMp2Trace(const Mp2Result& result, const std::filesystem::path& path);
void WriteFidoTrace(const FidoResult& result, const std::filesystem::path& path);

}  // namespace attrib

#endif  // ATTRIB_MASK_OPT_H_
