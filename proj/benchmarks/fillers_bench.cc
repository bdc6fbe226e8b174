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

#include <benchmark/benchmark.h>

#include "attrib/fillers.h"
#include "attrib/random.h"

namespace attrib {
namespace {

Image Noise(int n) {
  Image x(n, n);
  Rng rng(2);
  for (double& v : x.values()) v = rng.Uniform();
  return x;
}

// Square hole covering a quarter of the image.
void BM_HarmonicInpaint(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Image x = Noise(n);
  const PerturbMask mask = PerturbMask::Rectangle(n, n, n / 4, n / 4, n / 2, n / 2);
  for (auto _ : state) benchmark::DoNotOptimize(HarmonicInpaint(x, mask));
}
BENCHMARK(BM_HarmonicInpaint)->Arg(32)->Arg(64)->Arg(128);

void BM_DenseFillInpaint(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Image x = Noise(n);
  const PerturbMask mask = PerturbMask::Rectangle(n, n, n / 4, n / 4, n / 2, n / 2);
  const HarmonicInpainter inpaint;
  for (auto _ : state) {
    benchmark::DoNotOptimize(DenseFill(x, mask, inpaint, DefaultProbeBlock(n, n)));
  }
}
BENCHMARK(BM_DenseFillInpaint)->Arg(64);

}  // namespace
}  // namespace attrib

BENCHMARK_MAIN();
