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

#ifndef ATTRIB_SLIDING_PATCH_H_
#define ATTRIB_SLIDING_PATCH_H_

#include <filesystem>
#include <memory>
#include <vector>

#include "attrib/fillers.h"
#include "attrib/image.h"
#include "attrib/oracle.h"

namespace attrib {

struct SpConfig {
  int patch = 29;
  int stride = 3;
  // Gray for SP, an inpainter for SP-G. Null means the default gray filler.
  std::shared_ptr<const FillStrategy> filler;
  int target_class = 0;
  int threads = 1;
};

// Number of patch positions along an axis of length n: floor((n-p)/s)+1.
int SpPositions(int n, int patch, int stride);

struct SpResult {
  double base_score = 0.0;              // s(x)
  Field probabilities;                  // s(x_bar) per position
  Field coarse;                         // s(x) - s(x_bar) per position
  AttributionMap map;                   // coarse bilinearly upsampled
};

// Occludes a patch x patch square with top-left corner (r*stride, c*stride)
// for every position and records the score drop.
SpResult SlidingPatch(const Image& x, const ClassifierOracle& oracle,
                      const SpConfig& config);

inline AttributionMap SpAttribute(const Image& x, const ClassifierOracle& oracle,
                                  const SpConfig& config) {
  return SlidingPatch(x, oracle, config).map;
}

struct SpTracePoint {
  int row = 0;
  int col = 0;
  double probability = 0.0;
};

// s(x_bar) for every patch position of one coarse row.
std::vector<SpTracePoint> SpSampleTrace(const Image& x,
                                        const ClassifierOracle& oracle,
                                        const SpConfig& config, int row);

// CSV with header "row,col,probability".
void WriteSpProbabilities(const SpResult& result,
                          const std::filesystem::path& path);

}  // namespace attrib

#endif  // ATTRIB_SLIDING_PATCH_H_
