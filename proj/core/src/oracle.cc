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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "attrib/error.h"

namespace attrib {

void ClassifierOracle::CheckInput(const Image& x) const {
  if (x.empty()) throw ShapeError("oracle input is empty");
  const int h = input_height();
  const int w = input_width();
  if ((h > 0 && x.height() != h) || (w > 0 && x.width() != w)) {
    throw ShapeError("oracle expects " + std::to_string(h) + "x" +
                     std::to_string(w) + " input, got " +
                     std::to_string(x.height()) + "x" +
                     std::to_string(x.width()));
  }
}

void ClassifierOracle::CheckClass(int class_id) const {
  if (class_id < 0 || class_id >= num_classes()) {
    throw ParameterError("unknown class " + std::to_string(class_id) +
                         " (model has " + std::to_string(num_classes()) +
                         " classes)");
  }
}

std::vector<double> ClassifierOracle::ScoreAll(const Image& x) const {
  CheckInput(x);
  std::vector<double> p = DoScoreAll(x);
  if (static_cast<int>(p.size()) != num_classes()) {
    throw MethodError("oracle returned " + std::to_string(p.size()) +
                      " scores, expected " + std::to_string(num_classes()));
  }
  return p;
}

double ClassifierOracle::Score(const Image& x, int class_id) const {
  CheckClass(class_id);
  return ScoreAll(x)[class_id];
}

Image ClassifierOracle::InputGradient(const Image& x, int class_id) const {
  if (!capabilities().input_gradients) {
    throw UnsupportedError("oracle does not provide input gradients");
  }
  CheckClass(class_id);
  CheckInput(x);
  return DoInputGradient(x, class_id);
}

int ClassifierOracle::Top1(const Image& x) const {
  const std::vector<double> p = ScoreAll(x);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

Image ClassifierOracle::DoInputGradient(const Image&, int) const {
  throw UnsupportedError("oracle does not provide input gradients");
}

ConstantOracle::ConstantOracle(std::vector<double> probabilities)
    : probs_(std::move(probabilities)) {
  if (probs_.empty()) throw ParameterError("constant oracle needs >= 1 class");
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ParameterError("constant oracle probabilities must be in [0,1]");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw ParameterError("constant oracle probabilities must sum to 1");
  }
}

ConstantOracle ConstantOracle::Uniform(int num_classes) {
  if (num_classes < 1) throw ParameterError("num_classes must be >= 1");
  return ConstantOracle(std::vector<double>(num_classes, 1.0 / num_classes));
}

std::vector<double> ConstantOracle::DoScoreAll(const Image&) const {
  return probs_;
}

Image ConstantOracle::DoInputGradient(const Image& x, int) const {
  return Image(x.height(), x.width(), 0.0);
}

namespace {

void CheckBoxFits(const BoundingBox& box, const Image& x) {
  if (box.x_max >= x.width() || box.y_max >= x.height()) {
    throw ShapeError("region-mean box lies outside the image");
  }
}

double BoxMean(const BoundingBox& box, const Image& x) {
  double sum = 0.0;
  for (int r = box.y_min; r <= box.y_max; ++r) {
    for (int c = box.x_min; c <= box.x_max; ++c) {
      for (int ch = 0; ch < Image::kChannels; ++ch) sum += x(r, c, ch);
    }
  }
  return sum / (static_cast<double>(box.area()) * Image::kChannels);
}

}  // namespace

std::vector<double> RegionMeanOracle::DoScoreAll(const Image& x) const {
  CheckBoxFits(box_, x);
  const double p1 = std::clamp(BoxMean(box_, x), 0.0, 1.0);
  return {1.0 - p1, p1};
}

Image RegionMeanOracle::DoInputGradient(const Image& x, int class_id) const {
  CheckBoxFits(box_, x);
  Image g(x.height(), x.width(), 0.0);
  const double mean = BoxMean(box_, x);
  // The clamp is flat outside [0,1].
  if (mean < 0.0 || mean > 1.0) return g;
  const double v = (class_id == 1 ? 1.0 : -1.0) /
                   (static_cast<double>(box_.area()) * Image::kChannels);
  for (int r = box_.y_min; r <= box_.y_max; ++r) {
    for (int c = box_.x_min; c <= box_.x_max; ++c) {
      for (int ch = 0; ch < Image::kChannels; ++ch) g(r, c, ch) = v;
    }
  }
  return g;
}

LinearOracle::LinearOracle(Image weights, double bias)
    : weights_(std::move(weights)), bias_(bias) {
  if (weights_.empty()) throw ShapeError("linear oracle weights are empty");
}

std::vector<double> LinearOracle::DoScoreAll(const Image& x) const {
  double s = bias_;
  for (std::size_t i = 0; i < x.size(); ++i) s += weights_[i] * x[i];
  const double p1 = std::clamp(s, 0.0, 1.0);
  return {1.0 - p1, p1};
}

Image LinearOracle::DoInputGradient(const Image& x, int class_id) const {
  double s = bias_;
  for (std::size_t i = 0; i < x.size(); ++i) s += weights_[i] * x[i];
  Image g(x.height(), x.width(), 0.0);
  if (s < 0.0 || s > 1.0) return g;
  const double sign = class_id == 1 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = sign * weights_[i];
  return g;
}

Image FiniteDiffGradient(const ClassifierOracle& oracle, const Image& x,
                         int class_id, double h) {
  if (!(h > 0.0)) throw ParameterError("finite-difference step must be > 0");
  Image g(x.height(), x.width(), 0.0);
  Image probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = oracle.Score(probe, class_id);
    probe[i] = x[i] - h;
    const double down = oracle.Score(probe, class_id);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

FiniteDiffOracle::FiniteDiffOracle(
    std::shared_ptr<const ClassifierOracle> inner, double h)
    : inner_(std::move(inner)), h_(h) {
  if (!inner_) throw ParameterError("finite-difference oracle needs a model");
  if (!(h_ > 0.0)) throw ParameterError("finite-difference step must be > 0");
}

std::vector<double> FiniteDiffOracle::DoScoreAll(const Image& x) const {
  return inner_->ScoreAll(x);
}

Image FiniteDiffOracle::DoInputGradient(const Image& x, int class_id) const {
  return FiniteDiffGradient(*inner_, x, class_id, h_);
}

}  // namespace attrib
