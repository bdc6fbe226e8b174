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

#ifndef ATTRIB_TINY_CNN_H_
#define ATTRIB_TINY_CNN_H_

#include <cstdint>
#include <filesystem>
#include <variant>
#include <vector>

#include "attrib/image.h"
#include "attrib/oracle.h"

namespace attrib {

// On-disk layer tags of the TCNN model format.
enum class LayerTag : std::uint8_t {
  kConv3x3 = 1,
  kRelu = 2,
  kAvgPool2 = 3,
  kDense = 4,
  kSoftmax = 5,
};

// 3x3 convolution. Weights are laid out [out][ky][kx][in].
struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  bool same_padding = true;
  std::vector<double> weights;
  std::vector<double> bias;
};
struct ReluLayer {};
// 2x2 average pooling, stride 2; odd trailing rows/cols are dropped.
struct AvgPoolLayer {};
// Fully connected over the HWC-flattened input. Weights are [out][in].
struct DenseLayer {
  int in_features = 0;
  int out_features = 0;
  std::vector<double> weights;
  std::vector<double> bias;
};
struct SoftmaxLayer {};

using Layer = std::variant<ConvLayer, ReluLayer, AvgPoolLayer, DenseLayer, SoftmaxLayer>;

struct TinyCnnSpec {
  int input_height = 32;
  int input_width = 32;
  int num_classes = 2;
  // Output channels of each conv stage; every stage is conv-relu-pool.
  std::vector<int> conv_channels = {6, 8, 8};
};

// Small CNN with a hand-written backward pass. Weights are always float32
// representable so that save/load round-trips are exact.
class TinyCnn : public ClassifierOracle {
 public:
  TinyCnn(int input_height, int input_width, int num_classes,
          std::vector<Layer> layers);

  // He-normal initialization from a seed.
  static TinyCnn Initialize(const TinyCnnSpec& spec, std::uint64_t seed);

  int num_classes() const override { return num_classes_; }
  OracleCapabilities capabilities() const override { return {true, true}; }
  int input_height() const override { return input_h_; }
  int input_width() const override { return input_w_; }

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { return layers_; }

  // Pre-activation signs (z > 0) of every ReLU unit. Two inputs with the same
  // pattern lie in the same linear region of the network.
  std::vector<std::uint8_t> ActivationPattern(const Image& x) const;

  // Rounds every weight to float32 precision.
  void RoundToFloat();

  // Cross-entropy loss of one example; accumulates parameter gradients into
  // 'grads' (same structure as layers()). Returns the loss.
  double AccumulateGradients(const Image& x, int label,
                             std::vector<Layer>& grads) const;

 protected:
  std::vector<double> DoScoreAll(const Image& x) const override;
  Image DoInputGradient(const Image& x, int class_id) const override;

 private:
  struct Tensor {
    int h = 0, w = 0, c = 0;
    std::vector<double> data;
  };
  struct Trace {
    std::vector<Tensor> activations;  // input of every layer, then output
  };

  Trace Forward(const Image& x) const;
  // Back-propagates dL/dlogits (input of the softmax layer); returns dL/dx.
  Tensor Backward(const Trace& trace, std::vector<double> grad_logits,
                  std::vector<Layer>* grads) const;
  void Validate() const;

  int input_h_;
  int input_w_;
  int num_classes_;
  std::vector<Layer> layers_;
};

struct LabeledImage {
  Image image;
  int label = 0;
};

struct TrainOptions {
  int epochs = 30;
  double lr = 0.01;
  double momentum = 0.9;
  int batch_size = 16;
  std::uint64_t seed = 0;
};

struct TrainReport {
  std::vector<double> epoch_loss;      // mean cross-entropy per epoch
  std::vector<double> epoch_accuracy;  // training accuracy after each epoch
};

// Minibatch SGD with momentum; deterministic given options.seed.
TinyCnn TrainTinyCnn(const std::vector<LabeledImage>& data,
                     const TinyCnnSpec& spec, const TrainOptions& options,
                     TrainReport* report = nullptr);

// Fraction of examples whose top-1 class equals the label.
double Accuracy(const ClassifierOracle& model,
                const std::vector<LabeledImage>& data);

// TCNN model file:
//   "TCNN" | u32 version | u32 in_h | u32 in_w | u32 in_c | u32 classes |
//   u32 layer_count | layers...
// Each layer is a u8 tag; conv adds u32 in, u32 out, u8 same_padding and
// f32 weights + bias; dense adds u32 in, u32 out and f32 weights + bias.
// All integers and floats are little-endian.
inline constexpr std::uint32_t kModelVersion = 1;
std::vector<std::uint8_t> EncodeModel(const TinyCnn& model);
TinyCnn DecodeModel(const std::vector<std::uint8_t>& bytes);
void SaveModel(const TinyCnn& model, const std::filesystem::path& path);
TinyCnn LoadModel(const std::filesystem::path& path);

}  // namespace attrib

#endif  // ATTRIB_TINY_CNN_H_
