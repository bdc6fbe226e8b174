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

#ifndef ATTRIB_ORACLE_H_
#define ATTRIB_ORACLE_H_

#include <memory>
#include <vector>

#include "attrib/image.h"

namespace attrib {

struct OracleCapabilities {
  bool scores = true;
  bool input_gradients = false;
};

// A classifier seen through softmax probabilities, optionally with input
// gradients. Implementations must be safe to call concurrently.
class ClassifierOracle {
 public:
  virtual ~ClassifierOracle() = default;

  virtual int num_classes() const = 0;
  virtual OracleCapabilities capabilities() const { return {}; }
  // Required input size; 0 accepts any size.
  virtual int input_height() const { return 0; }
  virtual int input_width() const { return 0; }

  // Probability vector over all classes.
  std::vector<double> ScoreAll(const Image& x) const;
  // Probability of one class.
  double Score(const Image& x, int class_id) const;
  // d Score(x, class_id) / dx, same shape as x. Throws UnsupportedError when
  // the oracle has no gradient capability.
  Image InputGradient(const Image& x, int class_id) const;
  // Argmax of ScoreAll; ties resolve to the lowest class id.
  int Top1(const Image& x) const;

 protected:
  virtual std::vector<double> DoScoreAll(const Image& x) const = 0;
  virtual Image DoInputGradient(const Image& x, int class_id) const;

 private:
  void CheckInput(const Image& x) const;
  void CheckClass(int class_id) const;
};

// Fixed probability vector regardless of input (zero gradient).
class ConstantOracle : public ClassifierOracle {
 public:
  explicit ConstantOracle(std::vector<double> probabilities);
  // Uniform distribution over n classes.
  static ConstantOracle Uniform(int num_classes);

  int num_classes() const override { return static_cast<int>(probs_.size()); }
  OracleCapabilities capabilities() const override { return {true, true}; }

 protected:
  std::vector<double> DoScoreAll(const Image& x) const override;
  Image DoInputGradient(const Image& x, int class_id) const override;

 private:
  std::vector<double> probs_;
};

// Two-class oracle: class 1 scores the clamped mean intensity (over all
// channels) of a declared box, class 0 the complement.
class RegionMeanOracle : public ClassifierOracle {
 public:
  explicit RegionMeanOracle(BoundingBox box) : box_(box) {}

  int num_classes() const override { return 2; }
  OracleCapabilities capabilities() const override { return {true, true}; }
  const BoundingBox& box() const { return box_; }

 protected:
  std::vector<double> DoScoreAll(const Image& x) const override;
  Image DoInputGradient(const Image& x, int class_id) const override;

 private:
  BoundingBox box_;
};

// Two-class oracle: class 1 scores clamp(bias + <weights, x>, 0, 1).
class LinearOracle : public ClassifierOracle {
 public:
  LinearOracle(Image weights, double bias);

  int num_classes() const override { return 2; }
  OracleCapabilities capabilities() const override { return {true, true}; }
  int input_height() const override { return weights_.height(); }
  int input_width() const override { return weights_.width(); }

 protected:
  std::vector<double> DoScoreAll(const Image& x) const override;
  Image DoInputGradient(const Image& x, int class_id) const override;

 private:
  Image weights_;
  double bias_;
};

inline constexpr double kDefaultFiniteDiffStep = 1e-4;

// Central differences of Score(x, class_id) for every coordinate:
// 2 * H * W * 3 score calls.
Image FiniteDiffGradient(const ClassifierOracle& oracle, const Image& x,
                         int class_id, double h = kDefaultFiniteDiffStep);

// Gives a score-only oracle a (slow) gradient capability through finite
// differences. Only used when explicitly requested.
class FiniteDiffOracle : public ClassifierOracle {
 public:
  FiniteDiffOracle(std::shared_ptr<const ClassifierOracle> inner,
                   double h = kDefaultFiniteDiffStep);

  int num_classes() const override { return inner_->num_classes(); }
  OracleCapabilities capabilities() const override { return {true, true}; }
  int input_height() const override { return inner_->input_height(); }
  int input_width() const override { return inner_->input_width(); }

 protected:
  std::vector<double> DoScoreAll(const Image& x) const override;
  Image DoInputGradient(const Image& x, int class_id) const override;

 private:
  std::shared_ptr<const ClassifierOracle> inner_;
  double h_;
};

}  // namespace attrib

#endif  // ATTRIB_ORACLE_H_
