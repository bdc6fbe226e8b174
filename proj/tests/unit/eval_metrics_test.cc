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

#include "attrib/eval_metrics.h"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "attrib/error.h"
#include "attrib/image_ops.h"
#include "test_util.h"

namespace attrib {
namespace {

Field BoxMap(int h, int w, const BoundingBox& box, double in = 1.0, double out = 0.0) {
  Field f(h, w, out);
  for (int r = box.y_min; r <= box.y_max; ++r) {
    for (int c = box.x_min; c <= box.x_max; ++c) f(r, c) = in;
  }
  return f;
}

TEST(DeriveBoxTest, ThresholdsRelativeToTheMax) {
  Field m(6, 6, 0.0);
  m(1, 2) = 1.0;
  m(4, 3) = 0.6;
  m(2, 5) = 0.3;
  EXPECT_EQ(DeriveBox(m, 0.5), (BoundingBox{2, 1, 3, 4}));
  EXPECT_EQ(DeriveBox(m, 0.7), (BoundingBox{2, 1, 2, 1}));
  EXPECT_EQ(DeriveBox(m, 0.2), (BoundingBox{2, 1, 5, 4}));
  // alpha = 0 keeps every non-negative pixel.
  EXPECT_EQ(DeriveBox(m, 0.0), BoundingBox::Full(6, 6));
  // A map with no positive value yields the full image.
  EXPECT_EQ(DeriveBox(Field(3, 4, -1.0), 0.5), BoundingBox::Full(3, 4));
  EXPECT_THROW(DeriveBox(m, 1.0), ParameterError);
}

TEST(IouTest, HandComputed) {
  EXPECT_DOUBLE_EQ(Iou({0, 0, 1, 1}, {1, 1, 2, 2}), 1.0 / 7.0);
  EXPECT_DOUBLE_EQ(Iou({0, 0, 3, 3}, {0, 0, 3, 3}), 1.0);
  EXPECT_DOUBLE_EQ(Iou({0, 0, 1, 1}, {5, 5, 6, 6}), 0.0);
  EXPECT_DOUBLE_EQ(Iou({0, 0, 3, 1}, {0, 0, 1, 3}), 4.0 / 12.0);
}

TEST(LocalizationTest, BestOfSeveralBoxes) {
  const Field m = BoxMap(10, 10, {2, 2, 5, 5});
  const std::vector<BoundingBox> truth = {{7, 7, 9, 9}, {2, 2, 5, 6}};
  const LocalizationResult r = Localize(m, truth, 0.5);
  EXPECT_NEAR(r.iou, 16.0 / 20.0, 1e-15);
  EXPECT_TRUE(r.hit);
  EXPECT_THROW(Localize(m, {}, 0.5), ParameterError);
}

TEST(LocalizationTest, ErrorAndAlphaSelection) {
  // A ramp inside the object: small alpha gives the whole image, large alpha
  // shrinks onto the peak.
  Field m(10, 10, 0.1);
  for (int r = 3; r <= 6; ++r) {
    for (int c = 3; c <= 6; ++c) m(r, c) = 0.5;
  }
  m(4, 4) = 1.0;
  const std::vector<LocalizationItem> items = {{m, {{3, 3, 6, 6}}},
                                               {BoxMap(10, 10, {0, 0, 1, 1}), {{3, 3, 6, 6}}}};
  EXPECT_DOUBLE_EQ(LocalizationError(items, 0.05), 1.0);
  EXPECT_DOUBLE_EQ(LocalizationError(items, 0.3), 0.5);
  EXPECT_DOUBLE_EQ(LocalizationError(items, 0.8), 1.0);
  const std::vector<double> grid = {0.8, 0.05, 0.3, 0.4};
  const AlphaSelection sel = SelectAlpha(items, grid);
  EXPECT_DOUBLE_EQ(sel.alpha, 0.3);  // ties resolve to the smallest alpha
  EXPECT_DOUBLE_EQ(sel.error, 0.5);
  EXPECT_EQ(sel.errors, (std::vector<double>{1.0, 0.5, 0.5, 1.0}));
  EXPECT_EQ(DefaultAlphaGrid().size(), 20u);
  EXPECT_DOUBLE_EQ(DefaultAlphaGrid()[19], 0.95);
}

TEST(TrapezoidTest, Simple) {
  const std::vector<double> x = {0.0, 0.5, 1.0};
  const std::vector<double> y = {1.0, 0.0, 1.0};
  EXPECT_DOUBLE_EQ(Trapezoid(x, y), 0.5);
}

TEST(DeletionTest, LinearDecayHasHalfArea) {
  const Image x(4, 4, 1.0);
  const RegionMeanOracle oracle({0, 0, 3, 3});
  const DeletionCurve curve =
      DeletionMetric(x, testing::RandomField(4, 4, 1), oracle, 1, 4);
  EXPECT_EQ(curve.fractions, (std::vector<double>{0, 0.25, 0.5, 0.75, 1.0}));
  for (std::size_t i = 0; i < curve.fractions.size(); ++i) {
    EXPECT_NEAR(curve.probabilities[i], 1.0 - curve.fractions[i], 1e-15);
  }
  EXPECT_NEAR(curve.auc, 0.5, 1e-15);
}

TEST(DeletionTest, GoodMapsDeleteEvidenceFirst) {
  const BoundingBox box{4, 4, 7, 7};
  const Image x = testing::BrightBox(12, 12, box);
  const RegionMeanOracle oracle(box);
  const DeletionCurve good = DeletionMetric(x, BoxMap(12, 12, box), oracle, 1, 8);
  const DeletionCurve bad = DeletionMetric(x, BoxMap(12, 12, box, 0.0, 1.0), oracle, 1, 8);
  // Evidence gone after 16 of 144 pixels.
  EXPECT_NEAR(good.auc, 0.5 * (16.0 / 144.0) * 0.9, 1e-12);
  EXPECT_NEAR(bad.auc, 0.9 * (128.0 / 144.0) + 0.5 * (16.0 / 144.0) * 0.9, 1e-12);
  EXPECT_THROW(DeletionMetric(x, Field(3, 3), oracle, 1, 8), ShapeError);
  EXPECT_THROW(DeletionMetric(x, BoxMap(12, 12, box), oracle, 1, 0), ParameterError);
}

TEST(SaliencyTest, CropsTheDerivedBox) {
  const BoundingBox box{2, 2, 5, 5};
  const Image x = testing::BrightBox(8, 8, box);
  const RegionMeanOracle oracle(BoundingBox{0, 0, 7, 7});
  const SaliencyResult r = SaliencyMetric(x, BoxMap(8, 8, box), oracle, 1, 0.5);
  EXPECT_EQ(r.box, box);
  EXPECT_DOUBLE_EQ(r.area_fraction, 16.0 / 64.0);
  // The crop is the uniform bright square.
  EXPECT_NEAR(r.crop_score, 0.9, 1e-12);
  EXPECT_NEAR(r.value, std::log(0.25) - std::log(0.9), 1e-12);
  // Tiny boxes are floored at 5% of the image.
  const SaliencyResult tiny =
      SaliencyMetric(x, BoxMap(8, 8, {3, 3, 3, 3}), oracle, 1, 0.5);
  EXPECT_NEAR(tiny.value, std::log(0.05) - std::log(0.9), 1e-12);
}

TEST(CompareFillersTest, AccuracyAndSimilarityPerFiller) {
  const BoundingBox box{2, 2, 5, 5};
  const RegionMeanOracle oracle(box);
  std::vector<FillerItem> items;
  for (double fg : {0.8, 0.9}) {
    items.push_back({testing::BrightBox(16, 16, box, 0.1, fg),
                     PerturbMask::Rectangle(16, 16, 2, 2, 4, 4), 1});
  }
  const std::vector<std::shared_ptr<const FillStrategy>> fillers = {
      std::make_shared<IdentityFiller>(), std::make_shared<GrayFiller>()};
  const auto rows = CompareFillers(items, oracle, fillers);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].filler, "real");
  EXPECT_DOUBLE_EQ(rows[0].accuracy, 1.0);
  EXPECT_DOUBLE_EQ(rows[0].ms_ssim, 1.0);
  EXPECT_EQ(rows[1].filler, "gray");
  // Gray (~0.45) inside the box drops p1 below 0.5.
  EXPECT_DOUBLE_EQ(rows[1].accuracy, 0.0);
  EXPECT_LT(rows[1].ms_ssim, 1.0);
  EXPECT_EQ(rows[1].count, 2u);
  items[0].object_mask = PerturbMask();
  EXPECT_THROW(CompareFillers(items, oracle, fillers), ParameterError);
}

TEST(FullBlurTest, MeanTargetProbability) {
  const std::vector<LabeledInput> items = {{testing::RandomImage(8, 8, 2), 0},
                                           {testing::RandomImage(8, 8, 3), 1}};
  const ConstantOracle oracle({0.2, 0.8});
  EXPECT_DOUBLE_EQ(FullBlurConfidence(items, oracle, 5.0), 0.5);
  const RegionMeanOracle mean({0, 0, 7, 7});
  const double p = FullBlurConfidence({items.begin() + 1, items.end()}, mean, 1.0);
  EXPECT_NEAR(p, mean.Score(GaussianBlur(items[1].image, 1.0), 1), 1e-15);
}

TEST(OutsideBoxDropTest, ZeroWhenOnlyTheBoxMatters) {
  const BoundingBox box{6, 6, 9, 9};
  const Image x = testing::RandomImage(16, 16, 4);
  SpConfig cfg;
  cfg.patch = 4;
  cfg.stride = 2;
  cfg.target_class = 1;
  EXPECT_EQ(OutsideBoxDrop(x, box, RegionMeanOracle(box), cfg), 0.0);
  EXPECT_GT(OutsideBoxDrop(x, box, RegionMeanOracle({0, 0, 15, 15}), cfg), 0.0);
  cfg.patch = 16;
  EXPECT_EQ(OutsideBoxDrop(x, box, RegionMeanOracle({0, 0, 15, 15}), cfg), 0.0);
}

TEST(LabelHistogramTest, SortedByCount) {
  const RegionMeanOracle oracle({0, 0, 1, 1});
  const std::vector<Image> samples = {Image(2, 2, 0.9), Image(2, 2, 0.1), Image(2, 2, 0.8)};
  const auto h = LabelHistogram(samples, oracle);
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(h[0], (std::pair<int, std::size_t>{1, 2}));
  EXPECT_EQ(h[1], (std::pair<int, std::size_t>{0, 1}));
}

}  // namespace
}  // namespace attrib
