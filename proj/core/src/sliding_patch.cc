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

#include "attrib/sliding_patch.h"

#include <fstream>
#include <string>

#include "attrib/error.h"
#include "attrib/image_ops.h"
#include "attrib/parallel.h"

namespace attrib {
namespace {

void CheckConfig(const Image& x, const SpConfig& config) {
  if (x.empty()) throw ShapeError("sp: empty image");
  if (config.patch < 1) throw ParameterError("sp: patch must be >= 1");
  if (config.stride < 1) throw ParameterError("sp: stride must be >= 1");
  if (config.patch > x.height() || config.patch > x.width()) {
    throw ParameterError("sp: patch " + std::to_string(config.patch) +
                         " larger than the image");
  }
}

std::shared_ptr<const FillStrategy> FillerOrGray(const SpConfig& config) {
  if (config.filler) return config.filler;
  return std::make_shared<GrayFiller>();
}

double PositionScore(const Image& x, const ClassifierOracle& oracle,
                     const FillStrategy& filler, const SpConfig& config,
                     int row, int col) {
  try {
    const PerturbMask m = PerturbMask::Rectangle(
        x.height(), x.width(), row * config.stride, col * config.stride,
        config.patch, config.patch);
    return oracle.Score(Perturb(x, m, filler), config.target_class);
  } catch (const Error& e) {
    throw MethodError("sp: patch position (" + std::to_string(row) + "," +
                      std::to_string(col) + "): " + e.what());
  }
}

}  // namespace

int SpPositions(int n, int patch, int stride) {
  if (patch < 1 || stride < 1 || patch > n) return 0;
  return (n - patch) / stride + 1;
}

SpResult SlidingPatch(const Image& x, const ClassifierOracle& oracle,
                      const SpConfig& config) {
  CheckConfig(x, config);
  const auto filler = FillerOrGray(config);
  const int rows = SpPositions(x.height(), config.patch, config.stride);
  const int cols = SpPositions(x.width(), config.patch, config.stride);

  SpResult result;
  result.base_score = oracle.Score(x, config.target_class);
  result.probabilities = Field(rows, cols);
  if (filler->depends_on_mask()) {
    ParallelFor(static_cast<std::size_t>(rows) * cols, config.threads,
                [&](std::size_t i) {
                  const int r = static_cast<int>(i / cols);
                  const int c = static_cast<int>(i % cols);
                  result.probabilities[i] =
                      PositionScore(x, oracle, *filler, config, r, c);
                });
  } else {
    // One fill for all positions. A binary composite is exactly x or f, so
    // pasting the patch into a scratch copy and restoring it afterwards gives
    // the same images as Perturb.
    const Image f = filler->Fill(x, PerturbMask::Zeros(x.height(), x.width()));
    ParallelFor(rows, config.threads, [&](std::size_t r) {
      Image scratch = x;
      const int top = static_cast<int>(r) * config.stride;
      auto paste = [&](const Image& src, int left) {
        for (int rr = top; rr < top + config.patch; ++rr) {
          for (int cc = left; cc < left + config.patch; ++cc) {
            for (int ch = 0; ch < Image::kChannels; ++ch) {
              scratch(rr, cc, ch) = src(rr, cc, ch);
            }
          }
        }
      };
      for (int c = 0; c < cols; ++c) {
        const int left = c * config.stride;
        paste(f, left);
        try {
          result.probabilities(static_cast<int>(r), c) =
              oracle.Score(scratch, config.target_class);
        } catch (const Error& e) {
          throw MethodError("sp: patch position (" + std::to_string(r) + "," +
                            std::to_string(c) + "): " + e.what());
        }
        paste(x, left);
      }
    });
  }
  result.coarse = Field(rows, cols);
  for (std::size_t i = 0; i < result.coarse.size(); ++i) {
    result.coarse[i] = result.base_score - result.probabilities[i];
  }

  Provenance prov;
  prov.method = "sp";
  prov.params["patch"] = std::to_string(config.patch);
  prov.params["stride"] = std::to_string(config.stride);
  prov.params["target_class"] = std::to_string(config.target_class);
  prov.params["filler"] = filler->name();
  for (const auto& [k, v] : filler->params()) prov.params["filler." + k] = v;
  result.map = AttributionMap(
      BilinearResize(result.coarse, x.height(), x.width()), std::move(prov));
  return result;
}

std::vector<SpTracePoint> SpSampleTrace(const Image& x,
                                        const ClassifierOracle& oracle,
                                        const SpConfig& config, int row) {
  CheckConfig(x, config);
  const int rows = SpPositions(x.height(), config.patch, config.stride);
  const int cols = SpPositions(x.width(), config.patch, config.stride);
  if (row < 0 || row >= rows) {
    throw ParameterError("sp trace: row " + std::to_string(row) +
                         " outside [0, " + std::to_string(rows) + ")");
  }
  const auto filler = FillerOrGray(config);
  std::vector<SpTracePoint> trace(cols);
  ParallelFor(cols, config.threads, [&](std::size_t c) {
    trace[c] = {row, static_cast<int>(c),
                PositionScore(x, oracle, *filler, config, row,
                              static_cast<int>(c))};
  });
  return trace;
}

void WriteSpProbabilities(const SpResult& result,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  out << "row,col,probability\n";
  const Field& p = result.probabilities;
  for (int r = 0; r < p.height(); ++r) {
    for (int c = 0; c < p.width(); ++c) {
      out << r << ',' << c << ',' << p(r, c) << '\n';
    }
  }
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace attrib
