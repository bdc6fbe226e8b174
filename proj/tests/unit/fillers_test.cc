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

#include "attrib/fillers.h"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <memory>

#include "attrib/error.h"
#include "attrib/image_ops.h"
#include "attrib/random.h"
#include "test_util.h"

namespace attrib {
namespace {

using testing::RandomImage;

PerturbMask RandomBinaryMask(int h, int w, std::uint64_t seed, double p) {
  Field f(h, w);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = CounterUniform(seed, i) < p ? 1.0 : 0.0;
  }
  return PerturbMask(f, MaskKind::kBinary);
}

TEST(SimpleFillersTest, GrayNoiseBlurIdentity) {
  const Image x = RandomImage(6, 5, 1);
  const PerturbMask m = PerturbMask::Rectangle(6, 5, 1, 1, 2, 2);

  const Image gray = GrayFiller().Fill(x, m);
  EXPECT_EQ(gray, Image::Filled(6, 5, 0.485, 0.456, 0.406));
  EXPECT_THROW(GrayFiller({1.5, 0.0, 0.0}), ParameterError);

  const Image noise = NoiseFiller(9).Fill(x, m);
  for (std::size_t i = 0; i < noise.size(); ++i) {
    EXPECT_EQ(noise[i], CounterUniform24(9, i));
  }
  EXPECT_NE(NoiseFiller(10).Fill(x, m), noise);

  EXPECT_EQ(BlurFiller(2.0).Fill(x, m), GaussianBlur(x, 2.0));
  EXPECT_THROW(BlurFiller(0.0), ParameterError);

  EXPECT_EQ(IdentityFiller().Fill(x, m), x);
  EXPECT_THROW(GrayFiller().Fill(x, PerturbMask::Zeros(5, 5)), ShapeError);
}

TEST(SimpleFillersTest, PerturbIsComposite) {
  const Image x = RandomImage(4, 4, 2);
  const PerturbMask m(testing::RandomField(4, 4, 3), MaskKind::kContinuous);
  const BlurFiller blur(1.0);
  EXPECT_EQ(Perturb(x, m, blur), Composite(x, m, blur.Fill(x, m)));
}

TEST(HarmonicInpaintTest, EmptyMaskIsIdentityAndFullMaskFails) {
  const Image x = RandomImage(5, 5, 4);
  InpaintStats stats;
  EXPECT_EQ(HarmonicInpaint(x, PerturbMask::Zeros(5, 5), {}, &stats), x);
  EXPECT_TRUE(stats.converged);
  EXPECT_THROW(HarmonicInpaint(x, PerturbMask::Ones(5, 5)), MethodError);
}

TEST(HarmonicInpaintTest, ReproducesLinearRamps) {
  // Linear functions are discrete-harmonic, including at reflecting borders
  // when the ramp runs parallel to them.
  Image x(10, 12);
  for (int r = 0; r < 10; ++r) {
    for (int c = 0; c < 12; ++c) {
      x(r, c, 0) = 0.05 + 0.07 * c;
      x(r, c, 1) = 0.9 - 0.06 * c;
      x(r, c, 2) = 0.3;
    }
  }
  InpaintOptions opt;
  opt.tolerance = 1e-12;
  opt.max_iterations = 100000;
  const PerturbMask hole = PerturbMask::Rectangle(10, 12, 0, 3, 6, 5);
  const Image y = HarmonicInpaint(x, hole, opt);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], x[i], 1e-9);
}

// Direct solve of the discrete Laplace equation with Neumann borders.
Image SolveLaplace(const Image& x, const PerturbMask& mask) {
  const int h = x.height(), w = x.width();
  std::vector<int> index(x.pixel_count(), -1);
  int n = 0;
  for (std::size_t p = 0; p < x.pixel_count(); ++p) {
    if (mask[p] >= 0.5) index[p] = n++;
  }
  Image out = x;
  for (int ch = 0; ch < 3; ++ch) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const int i = index[r * w + c];
        if (i < 0) continue;
        const int dr[4] = {-1, 1, 0, 0};
        const int dc[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const int rr = r + dr[k], cc = c + dc[k];
          if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
          a(i, i) += 1.0;
          const int j = index[rr * w + cc];
          if (j >= 0) {
            a(i, j) -= 1.0;
          } else {
            b(i) += x(rr, cc, ch);
          }
        }
      }
    }
    const Eigen::VectorXd u = a.partialPivLu().solve(b);
    for (std::size_t p = 0; p < x.pixel_count(); ++p) {
      if (index[p] >= 0) out[p * 3 + ch] = u(index[p]);
    }
  }
  return out;
}

TEST(HarmonicInpaintTest, MatchesDirectSolve) {
  const Image x = RandomImage(9, 11, 5);
  const PerturbMask m = RandomBinaryMask(9, 11, 6, 0.4);
  const Image expect = SolveLaplace(x, m);
  for (InpaintSchedule s : {InpaintSchedule::kGaussSeidel, InpaintSchedule::kJacobi}) {
    InpaintOptions opt;
    opt.schedule = s;
    opt.tolerance = 1e-13;
    opt.max_iterations = 200000;
    InpaintStats stats;
    const Image y = HarmonicInpaint(x, m, opt, &stats);
    EXPECT_TRUE(stats.converged);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], expect[i], 1e-9);
  }
}

TEST(HarmonicInpaintTest, MaximumPrincipleHoldsPerChannel) {
  const Image x = RandomImage(16, 16, 7);
  const PerturbMask m = PerturbMask::Rectangle(16, 16, 4, 3, 8, 9);
  double lo[3] = {1, 1, 1}, hi[3] = {0, 0, 0};
  for (int r = 3; r <= 12; ++r) {
    for (int c = 2; c <= 12; ++c) {
      if (m(r, c) == 1.0) continue;
      for (int ch = 0; ch < 3; ++ch) {
        lo[ch] = std::min(lo[ch], x(r, c, ch));
        hi[ch] = std::max(hi[ch], x(r, c, ch));
      }
    }
  }
  for (int iters : {0, 1, 5, 2000}) {
    InpaintOptions opt;
    opt.max_iterations = iters;
    const Image y = HarmonicInpaint(x, m, opt);
    for (int r = 4; r < 12; ++r) {
      for (int c = 3; c < 12; ++c) {
        for (int ch = 0; ch < 3; ++ch) {
          EXPECT_GE(y(r, c, ch), lo[ch] - 1e-12);
          EXPECT_LE(y(r, c, ch), hi[ch] + 1e-12);
        }
      }
    }
  }
}

TEST(HarmonicInpaintTest, UpdatesShrinkAndStatsAreReported) {
  const Image x = RandomImage(20, 20, 8);
  InpaintStats stats;
  InpaintOptions opt;
  opt.tolerance = 1e-6;
  HarmonicInpaint(x, PerturbMask::Rectangle(20, 20, 5, 5, 10, 10), opt, &stats);
  EXPECT_TRUE(stats.converged);
  ASSERT_EQ(static_cast<int>(stats.max_updates.size()), stats.iterations);
  EXPECT_LT(stats.max_updates.back(), 1e-6);
  EXPECT_THROW(HarmonicInpainter(InpaintOptions{-1, 1e-4}), ParameterError);
}

TEST(HarmonicInpaintTest, UnmaskedPixelsUntouched) {
  const Image x = RandomImage(8, 8, 9);
  const PerturbMask m = RandomBinaryMask(8, 8, 10, 0.3);
  const Image y = HarmonicInpainter().Fill(x, m);
  for (std::size_t p = 0; p < x.pixel_count(); ++p) {
    if (m[p] == 1.0) continue;
    for (int ch = 0; ch < 3; ++ch) EXPECT_EQ(y[p * 3 + ch], x[p * 3 + ch]);
  }
}

TEST(DenseFillTest, DefaultProbeBlock) {
  EXPECT_EQ(DefaultProbeBlock(64, 64), 8);
  EXPECT_EQ(DefaultProbeBlock(65, 100), 9);
  EXPECT_EQ(DefaultProbeBlock(3, 3), 1);
}

TEST(DenseFillTest, MaskIndependentFillersPassThrough) {
  const Image x = RandomImage(8, 8, 11);
  const PerturbMask m = RandomBinaryMask(8, 8, 12, 0.5);
  const BlurFiller blur(1.5);
  EXPECT_EQ(DenseFill(x, m, blur, 2), blur.Fill(x, m));
  EXPECT_THROW(DenseFill(x, m, blur, 0), ParameterError);
  EXPECT_THROW(DenseFill(x, m, blur, 8), ParameterError);
  EXPECT_THROW(DenseFill(x, PerturbMask::Zeros(4, 4), blur, 2), ShapeError);
}

bool InPhase(int r, int c, int block, int phase) {
  return (r / block + c / block) % 2 == phase;
}

TEST(DenseFillTest, InpaintsEveryPixelFromTheRightProbe) {
  const Image x = RandomImage(12, 12, 13);
  const PerturbMask m = PerturbMask::Rectangle(12, 12, 3, 4, 4, 3);
  const HarmonicInpainter inpaint;
  const int block = 3;
  const Image out = DenseFill(x, m, inpaint, block);
  const Image masked = inpaint.Fill(x, m);
  Image probe_fill[2];
  for (int phase = 0; phase < 2; ++phase) {
    Field probe(12, 12, 0.0);
    for (int r = 0; r < 12; ++r) {
      for (int c = 0; c < 12; ++c) {
        if (InPhase(r, c, block, phase) || m(r, c) == 1.0) probe(r, c) = 1.0;
      }
    }
    probe_fill[phase] = inpaint.Fill(x, PerturbMask(probe, MaskKind::kBinary));
  }
  for (int r = 0; r < 12; ++r) {
    for (int c = 0; c < 12; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        const double expect = m(r, c) == 1.0
                                  ? masked(r, c, ch)
                                  : probe_fill[InPhase(r, c, block, 0) ? 0 : 1](r, c, ch);
        EXPECT_EQ(out(r, c, ch), expect) << r << "," << c;
      }
    }
  }
}

TEST(DenseFillTest, FullMaskUsesCheckerboardOnly) {
  const Image x = RandomImage(8, 8, 14);
  const HarmonicInpainter inpaint;
  const Image out = DenseFill(x, PerturbMask::Ones(8, 8), inpaint, 2);
  for (int phase = 0; phase < 2; ++phase) {
    Field probe(8, 8, 0.0);
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 8; ++c) probe(r, c) = InPhase(r, c, 2, phase) ? 1.0 : 0.0;
    }
    const Image f = inpaint.Fill(x, PerturbMask(probe, MaskKind::kBinary));
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 8; ++c) {
        if (!InPhase(r, c, 2, phase)) continue;
        for (int ch = 0; ch < 3; ++ch) EXPECT_EQ(out(r, c, ch), f(r, c, ch));
      }
    }
  }
}

TEST(ExternalInpainterTest, CopyAndGrayModes) {
  const Image x = RandomImage(8, 8, 15);
  const PerturbMask m = PerturbMask::Rectangle(8, 8, 2, 2, 3, 3);
  const Image copy = ExternalInpainter(testing::FakeTool("inpaint-copy")).Fill(x, m);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(copy[i], x[i], 0.5 / 255 + 1e-12);
  const Image gray = ExternalInpainter(testing::FakeTool("inpaint-gray")).Fill(x, m);
  EXPECT_DOUBLE_EQ(gray(3, 3, 1), 128.0 / 255.0);
  EXPECT_NEAR(gray(0, 0, 1), x(0, 0, 1), 0.5 / 255 + 1e-12);
}

TEST(ExternalInpainterTest, NativeSizeRoundTrip) {
  ExternalInpainterOptions opt;
  opt.native_size = 16;
  const Image x = Image::Filled(10, 6, 0.2, 0.4, 0.6);
  const Image y = ExternalInpainter(testing::FakeTool("inpaint-copy"), opt)
                      .Fill(x, PerturbMask::Zeros(10, 6));
  ASSERT_TRUE(y.same_shape(x));
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], x[i], 0.5 / 255 + 1e-12);
}

TEST(ExternalInpainterTest, FailuresAreIoErrors) {
  const Image x = RandomImage(6, 6, 16);
  const PerturbMask m = PerturbMask::Rectangle(6, 6, 1, 1, 2, 2);
  EXPECT_THROW(ExternalInpainter(testing::FakeTool("inpaint-fail")).Fill(x, m), IoError);
  EXPECT_THROW(ExternalInpainter(testing::FakeTool("inpaint-none")).Fill(x, m), IoError);
  ExternalInpainterOptions opt;
  opt.timeout = std::chrono::milliseconds(300);
  const auto start = std::chrono::steady_clock::now();
  EXPECT_THROW(ExternalInpainter(testing::FakeTool("inpaint-sleep"), opt).Fill(x, m),
               IoError);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(10));
  EXPECT_THROW(ExternalInpainter(""), ParameterError);
}

TEST(InpaintMaskTest, EncodesByThreshold) {
  Field f(1, 3);
  f[0] = 0.49;
  f[1] = 0.5;
  f[2] = 1.0;
  EXPECT_EQ(EncodeInpaintMask(PerturbMask(f, MaskKind::kContinuous)),
            (std::vector<std::uint8_t>{0, 255, 255}));
}

TEST(CachedFillerTest, HitsAndMisses) {
  auto cache = CachedFiller(std::make_shared<HarmonicInpainter>());
  const Image x = RandomImage(8, 8, 17);
  const PerturbMask a = PerturbMask::Rectangle(8, 8, 1, 1, 3, 3);
  const PerturbMask b = PerturbMask::Rectangle(8, 8, 2, 2, 3, 3);
  const Image fa = cache.Fill(x, a);
  EXPECT_EQ(cache.Fill(x, a), fa);
  cache.Fill(x, b);
  cache.Fill(RandomImage(8, 8, 18), a);
  EXPECT_EQ(cache.hits(), 1u);
  EXPECT_EQ(cache.misses(), 3u);
  EXPECT_EQ(fa, HarmonicInpainter().Fill(x, a));
  EXPECT_EQ(cache.name(), "inpaint");
  EXPECT_TRUE(cache.depends_on_mask());
  EXPECT_FALSE(CachedFiller(std::make_shared<GrayFiller>()).depends_on_mask());
  EXPECT_THROW(CachedFiller(nullptr), ParameterError);
}

}  // namespace
}  // namespace attrib
