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

#include "attrib/oracle.h"

#include <gtest/gtest.h>

#include <memory>

#include "attrib/error.h"
#include "attrib/score_server.h"
#include "test_util.h"

namespace attrib {
namespace {

TEST(ConstantOracleTest, ScoresAndZeroGradient) {
  const ConstantOracle o({0.2, 0.5, 0.3});
  const Image x = testing::RandomImage(4, 4, 1);
  EXPECT_EQ(o.ScoreAll(x), (std::vector<double>{0.2, 0.5, 0.3}));
  EXPECT_EQ(o.Score(x, 2), 0.3);
  EXPECT_EQ(o.Top1(x), 1);
  EXPECT_EQ(o.InputGradient(x, 0), Image(4, 4, 0.0));
}

TEST(ConstantOracleTest, Validation) {
  EXPECT_THROW(ConstantOracle({}), ParameterError);
  EXPECT_THROW(ConstantOracle({0.5, 0.6}), ParameterError);
  EXPECT_THROW(ConstantOracle({1.5, -0.5}), ParameterError);
  EXPECT_THROW(ConstantOracle::Uniform(0), ParameterError);
  const ConstantOracle u = ConstantOracle::Uniform(4);
  EXPECT_EQ(u.Score(Image(2, 2), 3), 0.25);
  EXPECT_THROW(u.Score(Image(2, 2), 4), ParameterError);
  EXPECT_THROW(u.Score(Image(2, 2), -1), ParameterError);
  EXPECT_THROW(u.Score(Image(), 0), ShapeError);
}

TEST(ConstantOracleTest, TiesGoToLowestClass) {
  EXPECT_EQ(ConstantOracle::Uniform(3).Top1(Image(1, 1)), 0);
}

TEST(RegionMeanOracleTest, ScoreIsBoxMean) {
  const BoundingBox box{1, 1, 2, 3};
  const RegionMeanOracle o(box);
  const Image x = testing::RandomImage(5, 5, 2);
  double sum = 0.0;
  for (int r = 1; r <= 3; ++r) {
    for (int c = 1; c <= 2; ++c) {
      for (int ch = 0; ch < 3; ++ch) sum += x(r, c, ch);
    }
  }
  EXPECT_NEAR(o.Score(x, 1), sum / 18.0, 1e-15);
  EXPECT_NEAR(o.Score(x, 0), 1.0 - sum / 18.0, 1e-15);
  EXPECT_THROW(o.Score(Image(3, 3), 1), ShapeError);
}

TEST(RegionMeanOracleTest, GradientMatchesFiniteDifferences) {
  const RegionMeanOracle o({1, 0, 3, 2});
  const Image x = testing::RandomImage(4, 5, 3);
  for (int k : {0, 1}) {
    const Image g = o.InputGradient(x, k);
    const Image fd = FiniteDiffGradient(o, x, k);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g[i], fd[i], 1e-9);
  }
}

TEST(LinearOracleTest, GradientMatchesFiniteDifferencesAndClamps) {
  const Image w = testing::RandomImage(3, 3, 4);
  Image wc = w;
  for (double& v : wc.values()) v = (v - 0.5) * 0.1;
  const LinearOracle o(wc, 0.5);
  const Image x = testing::RandomImage(3, 3, 5);
  const Image g = o.InputGradient(x, 1);
  const Image fd = FiniteDiffGradient(o, x, 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(g[i], wc[i], 1e-15);
    EXPECT_NEAR(fd[i], wc[i], 1e-9);
  }
  // Saturated: flat.
  const LinearOracle sat(wc, 5.0);
  EXPECT_EQ(sat.Score(x, 1), 1.0);
  EXPECT_EQ(sat.InputGradient(x, 1), Image(3, 3, 0.0));
  EXPECT_THROW(o.Score(Image(4, 4), 1), ShapeError);
}

TEST(FiniteDiffOracleTest, WrapsScoresAndDifferentiates) {
  auto inner = std::make_shared<RegionMeanOracle>(BoundingBox{0, 0, 1, 1});
  const FiniteDiffOracle o(inner, 1e-5);
  const Image x = testing::RandomImage(3, 3, 6);
  EXPECT_EQ(o.ScoreAll(x), inner->ScoreAll(x));
  EXPECT_TRUE(o.capabilities().input_gradients);
  const Image g = o.InputGradient(x, 1);
  EXPECT_NEAR(g(0, 0, 0), 1.0 / 12.0, 1e-9);
  EXPECT_NEAR(g(2, 2, 0), 0.0, 1e-12);
  EXPECT_THROW(FiniteDiffOracle(nullptr), ParameterError);
  EXPECT_THROW(FiniteDiffOracle(inner, 0.0), ParameterError);
}

TEST(ExternalScoreOracleTest, TalksToServer) {
  ExternalScoreOracle o(testing::FakeTool("score-server 3"), 3);
  EXPECT_FALSE(o.capabilities().input_gradients);
  const Image x = Image::Filled(4, 4, 0.2, 0.2, 0.2);
  const std::vector<double> p = o.ScoreAll(x);
  ASSERT_EQ(p.size(), 3u);
  // The image travels as PNG, so expect byte quantization.
  EXPECT_NEAR(p[0], 0.2, 1.0 / 255.0);
  EXPECT_NEAR(p[1], 0.4, 1.0 / 255.0);
  // The server is reused across requests.
  EXPECT_NEAR(o.Score(Image::Filled(4, 4, 0.8, 0.8, 0.8), 0), 0.8, 1.0 / 255.0);
  EXPECT_THROW(o.InputGradient(x, 0), UnsupportedError);
}

TEST(ExternalScoreOracleTest, BadRepliesAreIoErrors) {
  ExternalScoreOracle bad(testing::FakeTool("score-bad"), 2);
  EXPECT_THROW(bad.ScoreAll(Image(2, 2, 0.5)), IoError);
  ExternalScoreOracle wrong_count(testing::FakeTool("score-server 3"), 2);
  EXPECT_THROW(wrong_count.ScoreAll(Image(2, 2, 0.5)), IoError);
  EXPECT_THROW(ExternalScoreOracle("", 2), ParameterError);
}

}  // namespace
}  // namespace attrib
