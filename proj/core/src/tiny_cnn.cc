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

#include "attrib/tiny_cnn.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>
#include <string>
#include <utility>

#include "attrib/error.h"
#include "attrib/image_io.h"
#include "attrib/random.h"

namespace attrib {
namespace {

double RoundF(double v) { return static_cast<double>(static_cast<float>(v)); }

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::vector<Layer> ZeroLike(const std::vector<Layer>& layers) {
  std::vector<Layer> out = layers;
  for (Layer& layer : out) {
    std::visit(Overloaded{
                   [](ConvLayer& l) {
                     std::fill(l.weights.begin(), l.weights.end(), 0.0);
                     std::fill(l.bias.begin(), l.bias.end(), 0.0);
                   },
                   [](DenseLayer& l) {
                     std::fill(l.weights.begin(), l.weights.end(), 0.0);
                     std::fill(l.bias.begin(), l.bias.end(), 0.0);
                   },
                   [](auto&) {},
               },
               layer);
  }
  return out;
}

// Calls fn(param, grad) over matching weight vectors of two layer lists.
template <typename Fn>
void ForEachParam(std::vector<Layer>& params, std::vector<Layer>& other,
                  Fn fn) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (auto* c = std::get_if<ConvLayer>(&params[i])) {
      auto& g = std::get<ConvLayer>(other[i]);
      fn(c->weights, g.weights);
      fn(c->bias, g.bias);
    } else if (auto* d = std::get_if<DenseLayer>(&params[i])) {
      auto& g = std::get<DenseLayer>(other[i]);
      fn(d->weights, g.weights);
      fn(d->bias, g.bias);
    }
  }
}

}  // namespace

TinyCnn::TinyCnn(int input_height, int input_width, int num_classes,
                 std::vector<Layer> layers)
    : input_h_(input_height),
      input_w_(input_width),
      num_classes_(num_classes),
      layers_(std::move(layers)) {
  Validate();
}

void TinyCnn::Validate() const {
  if (input_h_ < 1 || input_w_ < 1) throw ShapeError("model input is empty");
  if (num_classes_ < 1) throw ShapeError("model needs >= 1 class");
  if (layers_.empty() || !std::holds_alternative<SoftmaxLayer>(layers_.back())) {
    throw ShapeError("model must end with a softmax layer");
  }
  int h = input_h_, w = input_w_, c = Image::kChannels;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const std::string where = "layer " + std::to_string(i) + ": ";
    std::visit(
        Overloaded{
            [&](const ConvLayer& l) {
              if (l.in_channels != c || l.out_channels < 1) {
                throw ShapeError(where + "conv channel mismatch");
              }
              if (l.weights.size() !=
                      static_cast<std::size_t>(l.out_channels) * 9 *
                          l.in_channels ||
                  l.bias.size() != static_cast<std::size_t>(l.out_channels)) {
                throw ShapeError(where + "conv weight size mismatch");
              }
              if (!l.same_padding) {
                h -= 2;
                w -= 2;
              }
              if (h < 1 || w < 1) throw ShapeError(where + "input too small");
              c = l.out_channels;
            },
            [&](const ReluLayer&) {},
            [&](const AvgPoolLayer&) {
              h /= 2;
              w /= 2;
              if (h < 1 || w < 1) throw ShapeError(where + "input too small");
            },
            [&](const DenseLayer& l) {
              if (l.in_features != h * w * c || l.out_features < 1) {
                throw ShapeError(where + "dense input size mismatch");
              }
              if (l.weights.size() != static_cast<std::size_t>(l.out_features) *
                                          l.in_features ||
                  l.bias.size() != static_cast<std::size_t>(l.out_features)) {
                throw ShapeError(where + "dense weight size mismatch");
              }
              h = 1;
              w = 1;
              c = l.out_features;
            },
            [&](const SoftmaxLayer&) {
              if (i + 1 != layers_.size()) {
                throw ShapeError(where + "softmax must be the last layer");
              }
              if (h * w * c != num_classes_) {
                throw ShapeError(where + "softmax width != class count");
              }
            },
        },
        layers_[i]);
  }
}

TinyCnn TinyCnn::Initialize(const TinyCnnSpec& spec, std::uint64_t seed) {
  if (spec.num_classes < 1) throw ParameterError("num_classes must be >= 1");
  Rng rng(seed);
  std::vector<Layer> layers;
  int h = spec.input_height, w = spec.input_width, c = Image::kChannels;
  for (int out : spec.conv_channels) {
    ConvLayer conv;
    conv.in_channels = c;
    conv.out_channels = out;
    conv.same_padding = true;
    conv.weights.resize(static_cast<std::size_t>(out) * 9 * c);
    conv.bias.assign(out, 0.0);
    const double sd = std::sqrt(2.0 / (9.0 * c));
    for (double& v : conv.weights) v = rng.Normal() * sd;
    // Inputs are non-negative, so a filter whose weights sum far below zero
    // starts out dead everywhere. Centering each filter avoids that.
    const std::size_t fan_in = static_cast<std::size_t>(9) * c;
    for (int o = 0; o < out; ++o) {
      double mean = 0.0;
      for (std::size_t k = 0; k < fan_in; ++k) mean += conv.weights[o * fan_in + k];
      mean /= static_cast<double>(fan_in);
      for (std::size_t k = 0; k < fan_in; ++k) {
        double& v = conv.weights[o * fan_in + k];
        v = RoundF(v - mean);
      }
      conv.bias[o] = RoundF(0.01);
    }
    layers.emplace_back(std::move(conv));
    layers.emplace_back(ReluLayer{});
    layers.emplace_back(AvgPoolLayer{});
    c = out;
    h /= 2;
    w /= 2;
  }
  DenseLayer dense;
  dense.in_features = h * w * c;
  dense.out_features = spec.num_classes;
  dense.weights.resize(static_cast<std::size_t>(dense.in_features) *
                       spec.num_classes);
  dense.bias.assign(spec.num_classes, 0.0);
  const double sd = std::sqrt(2.0 / std::max(1, dense.in_features));
  for (double& v : dense.weights) v = RoundF(rng.Normal() * sd);
  layers.emplace_back(std::move(dense));
  layers.emplace_back(SoftmaxLayer{});
  return TinyCnn(spec.input_height, spec.input_width, spec.num_classes,
                 std::move(layers));
}

TinyCnn::Trace TinyCnn::Forward(const Image& x) const {
  Trace trace;
  trace.activations.reserve(layers_.size() + 1);
  Tensor in{x.height(), x.width(), Image::kChannels,
            std::vector<double>(x.values().begin(), x.values().end())};
  trace.activations.push_back(std::move(in));
  for (const Layer& layer : layers_) {
    const Tensor& a = trace.activations.back();
    Tensor out;
    std::visit(
        Overloaded{
            [&](const ConvLayer& l) {
              const int pad = l.same_padding ? 1 : 0;
              out.h = l.same_padding ? a.h : a.h - 2;
              out.w = l.same_padding ? a.w : a.w - 2;
              out.c = l.out_channels;
              out.data.assign(static_cast<std::size_t>(out.h) * out.w * out.c,
                              0.0);
              const int ci = a.c;
              for (int r = 0; r < out.h; ++r) {
                for (int col = 0; col < out.w; ++col) {
                  double* o = &out.data[(static_cast<std::size_t>(r) * out.w +
                                         col) * out.c];
                  for (int k = 0; k < out.c; ++k) o[k] = l.bias[k];
                  for (int ky = 0; ky < 3; ++ky) {
                    const int ir = r + ky - pad;
                    if (ir < 0 || ir >= a.h) continue;
                    for (int kx = 0; kx < 3; ++kx) {
                      const int ic = col + kx - pad;
                      if (ic < 0 || ic >= a.w) continue;
                      const double* src =
                          &a.data[(static_cast<std::size_t>(ir) * a.w + ic) *
                                  ci];
                      for (int k = 0; k < out.c; ++k) {
                        const double* wt =
                            &l.weights[((static_cast<std::size_t>(k) * 3 + ky) *
                                            3 + kx) * ci];
                        double s = 0.0;
                        for (int j = 0; j < ci; ++j) s += wt[j] * src[j];
                        o[k] += s;
                      }
                    }
                  }
                }
              }
            },
            [&](const ReluLayer&) {
              out = a;
              for (double& v : out.data) v = v > 0.0 ? v : 0.0;
            },
            [&](const AvgPoolLayer&) {
              out.h = a.h / 2;
              out.w = a.w / 2;
              out.c = a.c;
              out.data.assign(static_cast<std::size_t>(out.h) * out.w * out.c,
                              0.0);
              for (int r = 0; r < out.h; ++r) {
                for (int col = 0; col < out.w; ++col) {
                  for (int k = 0; k < a.c; ++k) {
                    auto at = [&](int rr, int cc) {
                      return a.data[(static_cast<std::size_t>(rr) * a.w + cc) *
                                        a.c + k];
                    };
                    out.data[(static_cast<std::size_t>(r) * out.w + col) *
                                 out.c + k] =
                        0.25 * (at(2 * r, 2 * col) + at(2 * r, 2 * col + 1) +
                                at(2 * r + 1, 2 * col) +
                                at(2 * r + 1, 2 * col + 1));
                  }
                }
              }
            },
            [&](const DenseLayer& l) {
              out.h = 1;
              out.w = 1;
              out.c = l.out_features;
              out.data.resize(l.out_features);
              for (int k = 0; k < l.out_features; ++k) {
                const double* wt =
                    &l.weights[static_cast<std::size_t>(k) * l.in_features];
                double s = l.bias[k];
                for (int j = 0; j < l.in_features; ++j) s += wt[j] * a.data[j];
                out.data[k] = s;
              }
            },
            [&](const SoftmaxLayer&) {
              out = a;
              const double top = *std::max_element(out.data.begin(),
                                                   out.data.end());
              double total = 0.0;
              for (double& v : out.data) {
                v = std::exp(v - top);
                total += v;
              }
              for (double& v : out.data) v /= total;
            },
        },
        layer);
    trace.activations.push_back(std::move(out));
  }
  return trace;
}

TinyCnn::Tensor TinyCnn::Backward(const Trace& trace,
                                  std::vector<double> grad_logits,
                                  std::vector<Layer>* grads) const {
  const std::size_t last = layers_.size() - 1;  // softmax
  Tensor g = trace.activations[last];
  g.data = std::move(grad_logits);
  for (std::size_t li = last; li-- > 0;) {
    const Tensor& a = trace.activations[li];
    Tensor din{a.h, a.w, a.c, std::vector<double>(a.data.size(), 0.0)};
    Layer* grad_layer = grads ? &(*grads)[li] : nullptr;
    std::visit(
        Overloaded{
            [&](const ConvLayer& l) {
              const int pad = l.same_padding ? 1 : 0;
              const int ci = a.c;
              ConvLayer* gl = grad_layer ? &std::get<ConvLayer>(*grad_layer)
                                         : nullptr;
              for (int r = 0; r < g.h; ++r) {
                for (int col = 0; col < g.w; ++col) {
                  const double* go =
                      &g.data[(static_cast<std::size_t>(r) * g.w + col) * g.c];
                  for (int k = 0; k < g.c; ++k) {
                    if (gl) gl->bias[k] += go[k];
                  }
                  for (int ky = 0; ky < 3; ++ky) {
                    const int ir = r + ky - pad;
                    if (ir < 0 || ir >= a.h) continue;
                    for (int kx = 0; kx < 3; ++kx) {
                      const int ic = col + kx - pad;
                      if (ic < 0 || ic >= a.w) continue;
                      const std::size_t base =
                          (static_cast<std::size_t>(ir) * a.w + ic) * ci;
                      const double* src = &a.data[base];
                      double* dst = &din.data[base];
                      for (int k = 0; k < g.c; ++k) {
                        const double gk = go[k];
                        if (gk == 0.0) continue;
                        const std::size_t woff =
                            ((static_cast<std::size_t>(k) * 3 + ky) * 3 + kx) *
                            ci;
                        const double* wt = &l.weights[woff];
                        for (int j = 0; j < ci; ++j) dst[j] += wt[j] * gk;
                        if (gl) {
                          double* gw = &gl->weights[woff];
                          for (int j = 0; j < ci; ++j) gw[j] += src[j] * gk;
                        }
                      }
                    }
                  }
                }
              }
            },
            [&](const ReluLayer&) {
              for (std::size_t i = 0; i < din.data.size(); ++i) {
                din.data[i] = a.data[i] > 0.0 ? g.data[i] : 0.0;
              }
            },
            [&](const AvgPoolLayer&) {
              for (int r = 0; r < g.h; ++r) {
                for (int col = 0; col < g.w; ++col) {
                  for (int k = 0; k < g.c; ++k) {
                    const double v =
                        0.25 *
                        g.data[(static_cast<std::size_t>(r) * g.w + col) * g.c +
                               k];
                    for (int dy = 0; dy < 2; ++dy) {
                      for (int dx = 0; dx < 2; ++dx) {
                        din.data[(static_cast<std::size_t>(2 * r + dy) * a.w +
                                  2 * col + dx) * a.c + k] = v;
                      }
                    }
                  }
                }
              }
            },
            [&](const DenseLayer& l) {
              DenseLayer* gl = grad_layer ? &std::get<DenseLayer>(*grad_layer)
                                          : nullptr;
              for (int k = 0; k < l.out_features; ++k) {
                const double gk = g.data[k];
                const std::size_t off =
                    static_cast<std::size_t>(k) * l.in_features;
                for (int j = 0; j < l.in_features; ++j) {
                  din.data[j] += l.weights[off + j] * gk;
                }
                if (gl) {
                  gl->bias[k] += gk;
                  for (int j = 0; j < l.in_features; ++j) {
                    gl->weights[off + j] += a.data[j] * gk;
                  }
                }
              }
            },
            [&](const SoftmaxLayer&) {},
        },
        layers_[li]);
    g = std::move(din);
  }
  return g;
}

std::vector<double> TinyCnn::DoScoreAll(const Image& x) const {
  return Forward(x).activations.back().data;
}

Image TinyCnn::DoInputGradient(const Image& x, int class_id) const {
  const Trace trace = Forward(x);
  const std::vector<double>& p = trace.activations.back().data;
  std::vector<double> dz(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    dz[k] = p[class_id] * ((static_cast<int>(k) == class_id ? 1.0 : 0.0) - p[k]);
  }
  const Tensor g = Backward(trace, std::move(dz), nullptr);
  Image out(x.height(), x.width(), 0.0);
  std::copy(g.data.begin(), g.data.end(), out.values().begin());
  return out;
}

std::vector<std::uint8_t> TinyCnn::ActivationPattern(const Image& x) const {
  const Trace trace = Forward(x);
  std::vector<std::uint8_t> pattern;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (!std::holds_alternative<ReluLayer>(layers_[i])) continue;
    for (double v : trace.activations[i].data) pattern.push_back(v > 0.0);
  }
  return pattern;
}

void TinyCnn::RoundToFloat() {
  for (Layer& layer : layers_) {
    if (auto* c = std::get_if<ConvLayer>(&layer)) {
      for (double& v : c->weights) v = RoundF(v);
      for (double& v : c->bias) v = RoundF(v);
    } else if (auto* d = std::get_if<DenseLayer>(&layer)) {
      for (double& v : d->weights) v = RoundF(v);
      for (double& v : d->bias) v = RoundF(v);
    }
  }
}

double TinyCnn::AccumulateGradients(const Image& x, int label,
                                    std::vector<Layer>& grads) const {
  if (label < 0 || label >= num_classes_) {
    throw ParameterError("label " + std::to_string(label) + " out of range");
  }
  if (x.height() != input_h_ || x.width() != input_w_) {
    throw ShapeError("training image does not match the model input size");
  }
  const Trace trace = Forward(x);
  std::vector<double> dz = trace.activations.back().data;
  const double loss = -std::log(std::max(dz[label], 1e-300));
  dz[label] -= 1.0;
  Backward(trace, std::move(dz), &grads);
  return loss;
}

TinyCnn TrainTinyCnn(const std::vector<LabeledImage>& data,
                     const TinyCnnSpec& spec, const TrainOptions& options,
                     TrainReport* report) {
  if (data.empty()) throw ParameterError("training dataset is empty");
  if (!(options.lr > 0.0)) throw ParameterError("learning rate must be > 0");
  if (options.epochs < 1) throw ParameterError("epochs must be >= 1");
  if (options.batch_size < 1) throw ParameterError("batch size must be >= 1");
  if (!(options.momentum >= 0.0 && options.momentum < 1.0)) {
    throw ParameterError("momentum must be in [0,1)");
  }
  for (const LabeledImage& ex : data) {
    if (ex.label < 0 || ex.label >= spec.num_classes) {
      throw ParameterError("label " + std::to_string(ex.label) +
                           " out of range");
    }
  }

  TinyCnn model = TinyCnn::Initialize(spec, options.seed);
  std::vector<Layer> velocity = ZeroLike(model.layers());
  Rng order_rng(Mix64(options.seed ^ 0x7261696e5f6f7264ULL));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    order_rng.Shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += options.batch_size) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(
                                             options.batch_size));
      std::vector<Layer> grads = ZeroLike(model.layers());
      for (std::size_t i = start; i < end; ++i) {
        const LabeledImage& ex = data[order[i]];
        loss_sum += model.AccumulateGradients(ex.image, ex.label, grads);
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      ForEachParam(velocity, grads,
                   [&](std::vector<double>& v, std::vector<double>& g) {
                     for (std::size_t k = 0; k < v.size(); ++k) {
                       v[k] = options.momentum * v[k] - options.lr * scale * g[k];
                     }
                   });
      ForEachParam(model.mutable_layers(), velocity,
                   [](std::vector<double>& w, std::vector<double>& v) {
                     for (std::size_t k = 0; k < w.size(); ++k) w[k] += v[k];
                   });
    }
    if (report) {
      report->epoch_loss.push_back(loss_sum / static_cast<double>(data.size()));
      report->epoch_accuracy.push_back(Accuracy(model, data));
    }
  }
  model.RoundToFloat();
  return model;
}

double Accuracy(const ClassifierOracle& model,
                const std::vector<LabeledImage>& data) {
  if (data.empty()) return 0.0;
  std::size_t correct = 0;
  for (const LabeledImage& ex : data) {
    if (model.Top1(ex.image) == ex.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

namespace {

class ByteWriter {
 public:
  void U8(std::uint8_t v) { bytes_.push_back(v); }
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back((v >> (8 * i)) & 0xFF);
  }
  void F32(double v) { U32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); }
  void Raw(const char* s, std::size_t n) { bytes_.insert(bytes_.end(), s, s + n); }
  std::vector<std::uint8_t> Take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& bytes) : b_(bytes) {}
  void Need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw IoError("model file is truncated");
  }
  std::uint8_t U8() {
    Need(1);
    return b_[pos_++];
  }
  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_++]) << (8 * i);
    return v;
  }
  double F32() { return static_cast<double>(std::bit_cast<float>(U32())); }
  void F32s(std::vector<double>& out, std::size_t n) {
    Need(n * 4);
    out.resize(n);
    for (double& v : out) {
      v = F32();
      if (!std::isfinite(v)) throw IoError("model file has non-finite weight");
    }
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

// Upper bound on any single dimension read from a model file.
constexpr std::uint32_t kMaxDim = 1u << 16;

std::uint32_t Dim(ByteReader& in) {
  const std::uint32_t v = in.U32();
  if (v == 0 || v > kMaxDim) throw IoError("model file has an invalid size");
  return v;
}

}  // namespace

std::vector<std::uint8_t> EncodeModel(const TinyCnn& model) {
  ByteWriter out;
  out.Raw("TCNN", 4);
  out.U32(kModelVersion);
  out.U32(model.input_height());
  out.U32(model.input_width());
  out.U32(Image::kChannels);
  out.U32(model.num_classes());
  out.U32(static_cast<std::uint32_t>(model.layers().size()));
  for (const Layer& layer : model.layers()) {
    std::visit(Overloaded{
                   [&](const ConvLayer& l) {
                     out.U8(static_cast<std::uint8_t>(LayerTag::kConv3x3));
                     out.U32(l.in_channels);
                     out.U32(l.out_channels);
                     out.U8(l.same_padding ? 1 : 0);
                     for (double v : l.weights) out.F32(v);
                     for (double v : l.bias) out.F32(v);
                   },
                   [&](const ReluLayer&) {
                     out.U8(static_cast<std::uint8_t>(LayerTag::kRelu));
                   },
                   [&](const AvgPoolLayer&) {
                     out.U8(static_cast<std::uint8_t>(LayerTag::kAvgPool2));
                   },
                   [&](const DenseLayer& l) {
                     out.U8(static_cast<std::uint8_t>(LayerTag::kDense));
                     out.U32(l.in_features);
                     out.U32(l.out_features);
                     for (double v : l.weights) out.F32(v);
                     for (double v : l.bias) out.F32(v);
                   },
                   [&](const SoftmaxLayer&) {
                     out.U8(static_cast<std::uint8_t>(LayerTag::kSoftmax));
                   },
               },
               layer);
  }
  return out.Take();
}

TinyCnn DecodeModel(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "TCNN", 4) != 0) {
    throw IoError("not a TCNN model file (bad magic)");
  }
  ByteReader in(bytes);
  for (int i = 0; i < 4; ++i) in.U8();
  const std::uint32_t version = in.U32();
  if (version != kModelVersion) {
    throw IoError("unsupported model version " + std::to_string(version));
  }
  const int h = static_cast<int>(Dim(in));
  const int w = static_cast<int>(Dim(in));
  if (in.U32() != static_cast<std::uint32_t>(Image::kChannels)) {
    throw IoError("model input must have 3 channels");
  }
  const int classes = static_cast<int>(Dim(in));
  const std::uint32_t count = Dim(in);
  std::vector<Layer> layers;
  for (std::uint32_t i = 0; i < count; ++i) {
    switch (static_cast<LayerTag>(in.U8())) {
      case LayerTag::kConv3x3: {
        ConvLayer l;
        l.in_channels = static_cast<int>(Dim(in));
        l.out_channels = static_cast<int>(Dim(in));
        l.same_padding = in.U8() != 0;
        in.F32s(l.weights, static_cast<std::size_t>(l.out_channels) * 9 *
                               l.in_channels);
        in.F32s(l.bias, l.out_channels);
        layers.emplace_back(std::move(l));
        break;
      }
      case LayerTag::kRelu:
        layers.emplace_back(ReluLayer{});
        break;
      case LayerTag::kAvgPool2:
        layers.emplace_back(AvgPoolLayer{});
        break;
      case LayerTag::kDense: {
        DenseLayer l;
        l.in_features = static_cast<int>(in.U32());
        l.out_features = static_cast<int>(Dim(in));
        if (l.in_features <= 0 || l.in_features > (1 << 26)) {
          throw IoError("model file has an invalid size");
        }
        in.F32s(l.weights, static_cast<std::size_t>(l.out_features) *
                               l.in_features);
        in.F32s(l.bias, l.out_features);
        layers.emplace_back(std::move(l));
        break;
      }
      case LayerTag::kSoftmax:
        layers.emplace_back(SoftmaxLayer{});
        break;
      default:
        throw IoError("unknown layer tag in model file");
    }
  }
  if (!in.done()) throw IoError("trailing bytes in model file");
  try {
    return TinyCnn(h, w, classes, std::move(layers));
  } catch (const ShapeError& e) {
    throw IoError(std::string("inconsistent model file: ") + e.what());
  }
}

void SaveModel(const TinyCnn& model, const std::filesystem::path& path) {
  WriteFileBytes(EncodeModel(model), path);
}

TinyCnn LoadModel(const std::filesystem::path& path) {
  return DecodeModel(ReadFileBytes(path));
}

}  // namespace attrib
