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

#include "attrib/image.h"
#include "attrib/image_ops.h"
#include "attrib/random.h"

namespace attrib {
namespace {

Image Noise(int n) {
  Image x(n, n);
  Rng rng(1);
  for (double& v : x.values()) v = rng.Uniform();
  return x;
}

void BM_Composite(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Image x = Noise(n), f(n, n, 0.5);
  Field m(n, n, 0.0);
  for (int r = n / 4; r < 3 * n / 4; ++r) {
    for (int c = n / 4; c < 3 * n / 4; ++c) m(r, c) = 1.0;
  }
  for (auto _ : state) benchmark::DoNotOptimize(Composite(x, m, f));
}
BENCHMARK(BM_Composite)->Arg(64)->Arg(224);

void BM_GaussianBlur(benchmark::State& state) {
  const Image x = Noise(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(GaussianBlur(x, 10.0));
}
BENCHMARK(BM_GaussianBlur)->Arg(64)->Arg(224);

void BM_BilinearUpsample(benchmark::State& state) {
  Field m(28, 28, 0.25);
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(BilinearResize(m, n, n));
}
BENCHMARK(BM_BilinearUpsample)->Arg(64)->Arg(224);

}  // namespace
}  // namespace attrib

BENCHMARK_MAIN();
