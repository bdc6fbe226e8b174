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

#include "attrib/mask_opt.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "attrib/error.h"
#include "attrib/random.h"

namespace attrib {
namespace {

std::string Num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void CheckMaskSize(const char* method, int mask_size, const Image& x) {
  if (x.empty()) throw ShapeError(std::string(method) + ": empty image");
  if (mask_size < 1 || mask_size > x.height() || mask_size > x.width()) {
    throw ParameterError(std::string(method) + ": mask size " +
                         std::to_string(mask_size) +
                         " must be in [1, image size]");
  }
}

void RequireGradients(const char* method, const ClassifierOracle& oracle) {
  if (!oracle.capabilities().input_gradients) {
    throw UnsupportedError(std::string(method) +
                           " needs input gradients; the model only provides "
                           "scores (enable finite differences explicitly)");
  }
}

// sum_ch (f - x) * g per pixel: the derivative of a composite through the
// mask, contracted with an image gradient.
Field MaskContraction(const Image& x, const Image& fill, const Image& g) {
  Field out(x.height(), x.width());
  for (std::size_t p = 0; p < x.pixel_count(); ++p) {
    double s = 0.0;
    for (int ch = 0; ch < 3; ++ch) {
      s += (fill[p * 3 + ch] - x[p * 3 + ch]) * g[p * 3 + ch];
    }
    out[p] = s;
  }
  return out;
}

bool AllFinite(const Field& f) {
  for (double v : f.values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

double TvNorm(const Field& m, double beta) {
  if (!(beta > 0.0)) throw ParameterError("tv: beta must be > 0");
  double total = 0.0;
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      const double dx = c + 1 < m.width() ? m(r, c + 1) - m(r, c) : 0.0;
      const double dy = r + 1 < m.height() ? m(r + 1, c) - m(r, c) : 0.0;
      const double g = std::sqrt(dx * dx + dy * dy);
      if (g > 0.0) total += std::pow(g, beta);
    }
  }
  return total;
}

Field TvNormGradient(const Field& m, double beta) {
  if (!(beta > 0.0)) throw ParameterError("tv: beta must be > 0");
  Field grad(m.height(), m.width(), 0.0);
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      const bool right = c + 1 < m.width();
      const bool down = r + 1 < m.height();
      const double dx = right ? m(r, c + 1) - m(r, c) : 0.0;
      const double dy = down ? m(r + 1, c) - m(r, c) : 0.0;
      const double g2 = dx * dx + dy * dy;
      if (g2 == 0.0) continue;
      const double coef = beta * std::pow(g2, 0.5 * beta - 1.0);
      grad(r, c) -= coef * (dx + dy);
      if (right) grad(r, c + 1) += coef * dx;
      if (down) grad(r + 1, c) += coef * dy;
    }
  }
  return grad;
}

std::vector<JitterShift> AllJitterShifts() {
  std::vector<JitterShift> shifts = {{0, JitterDirection::kHorizontal}};
  for (int t = 1; t <= kMaxJitter; ++t) {
    shifts.push_back({t, JitterDirection::kHorizontal});
  }
  for (int t = 1; t <= kMaxJitter; ++t) {
    shifts.push_back({t, JitterDirection::kVertical});
  }
  return shifts;
}

MpObjective MpEvaluate(const Image& x, const Image& blurred,
                       const ClassifierOracle& oracle, const MpConfig& config,
                       const Field& coarse, std::span<const JitterShift> batch,
                       Field* grad) {
  if (batch.empty()) throw ParameterError("mp: empty jitter batch");
  if (!x.same_shape(blurred)) throw ShapeError("mp: blurred image shape");
  const BilinearResizer up(coarse.height(), coarse.width(), x.height(),
                           x.width());
  const Field mask = up.Apply(coarse);
  const Image xb = Composite(x, mask, blurred);

  MpObjective obj;
  double l1 = 0.0;
  for (double v : coarse.values()) l1 += std::abs(v);
  obj.l1 = config.lambda1 * l1;
  obj.tv = config.lambda2 * TvNorm(coarse, config.tv_beta);

  const double inv_b = 1.0 / static_cast<double>(batch.size());
  Image img_grad;
  if (grad) img_grad = Image(x.height(), x.width(), 0.0);
  for (const JitterShift& s : batch) {
    const Image xj = Jitter(xb, s.tau, s.direction);
    obj.score += oracle.Score(xj, config.target_class) * inv_b;
    if (grad) {
      const Image g = JitterAdjoint(
          oracle.InputGradient(xj, config.target_class), s.tau, s.direction);
      for (std::size_t i = 0; i < g.size(); ++i) img_grad[i] += g[i] * inv_b;
    }
  }
  obj.total = obj.l1 + obj.tv + obj.score;

  if (grad) {
    Field g = up.ApplyAdjoint(MaskContraction(x, blurred, img_grad));
    const Field tv = TvNormGradient(coarse, config.tv_beta);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = coarse[i];
      const double sign = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
      g[i] += config.lambda1 * sign + config.lambda2 * tv[i];
    }
    *grad = std::move(g);
  }
  return obj;
}

MpResult MpAttribute(const Image& x, const ClassifierOracle& oracle,
                     const MpConfig& config) {
  CheckMaskSize("mp", config.mask_size, x);
  if (config.steps < 1) throw ParameterError("mp: steps must be >= 1");
  if (!(config.lr > 0.0)) throw ParameterError("mp: lr must be > 0");
  if (config.jitter_max < 0 || config.jitter_max > kMaxJitter) {
    throw ParameterError("mp: jitter must be in [0, 4]");
  }
  if (config.jitter_batch < 1) throw ParameterError("mp: jitter batch must be >= 1");
  if (!(config.lambda1 >= 0.0) || !(config.lambda2 >= 0.0)) {
    throw ParameterError("mp: lambdas must be >= 0");
  }
  RequireGradients("mp", oracle);

  Rng rng(config.seed);
  Field m(config.mask_size, config.mask_size);
  for (double& v : m.values()) v = rng.Uniform();
  const Image blurred = GaussianBlur(x, config.blur_sigma);

  std::vector<JitterShift> fixed;
  if (config.deterministic_jitter) {
    for (const JitterShift& s : AllJitterShifts()) {
      if (s.tau <= config.jitter_max) fixed.push_back(s);
    }
  }

  MpResult result;
  result.trace.reserve(config.steps);
  std::vector<JitterShift> batch;
  for (int step = 0; step < config.steps; ++step) {
    if (config.deterministic_jitter) {
      batch = fixed;
    } else {
      batch.clear();
      for (int b = 0; b < config.jitter_batch; ++b) {
        const int tau = static_cast<int>(rng.Below(config.jitter_max + 1));
        const JitterDirection dir = rng.Below(2) == 0
                                        ? JitterDirection::kHorizontal
                                        : JitterDirection::kVertical;
        batch.push_back({tau, dir});
      }
    }
    Field g;
    MpObjective obj;
    try {
      obj = MpEvaluate(x, blurred, oracle, config, m, batch, &g);
    } catch (const Error& e) {
      throw MethodError("mp: step " + std::to_string(step) + ": " + e.what());
    }
    if (!std::isfinite(obj.total) || !AllFinite(g)) {
      throw MethodError("mp: non-finite objective at step " +
                        std::to_string(step));
    }
    result.trace.push_back({step, obj, m.sum() / static_cast<double>(m.size())});
    for (std::size_t i = 0; i < m.size(); ++i) {
      m[i] = std::clamp(m[i] - config.lr * g[i], 0.0, 1.0);
    }
  }

  Provenance prov;
  prov.method = "mp";
  prov.params = {{"mask_size", std::to_string(config.mask_size)},
                 {"lambda1", Num(config.lambda1)},
                 {"lambda2", Num(config.lambda2)},
                 {"tv_beta", Num(config.tv_beta)},
                 {"steps", std::to_string(config.steps)},
                 {"lr", Num(config.lr)},
                 {"jitter_max", std::to_string(config.jitter_max)},
                 {"jitter_batch", std::to_string(config.jitter_batch)},
                 {"blur_sigma", Num(config.blur_sigma)},
                 {"seed", std::to_string(config.seed)},
                 {"target_class", std::to_string(config.target_class)}};
  result.map = AttributionMap(BilinearResize(m, x.height(), x.width()),
                              std::move(prov));
  result.mask = std::move(m);
  return result;
}

Image Mp2Perturbed(const Image& x, const Field& coarse,
                   const FillStrategy& filler, int probe_block,
                   Image* fill_out) {
  const Field mask = BilinearResize(coarse, x.height(), x.width());
  if (probe_block <= 0) probe_block = DefaultProbeBlock(x.height(), x.width());
  Image fill = DenseFill(x, PerturbMask(mask, MaskKind::kContinuous), filler,
                         probe_block);
  Image xb = Composite(x, mask, fill);
  if (fill_out) *fill_out = std::move(fill);
  return xb;
}

Field Mp2MaskGradient(const Image& x, const Field& coarse,
                      const ClassifierOracle& oracle,
                      const FillStrategy& filler, int target_class,
                      int probe_block) {
  Image fill;
  const Image xb = Mp2Perturbed(x, coarse, filler, probe_block, &fill);
  const Image g = oracle.InputGradient(xb, target_class);
  const BilinearResizer up(coarse.height(), coarse.width(), x.height(),
                           x.width());
  return up.ApplyAdjoint(MaskContraction(x, fill, g));
}

Mp2Result Mp2Attribute(const Image& x, const ClassifierOracle& oracle,
                       const Mp2Config& config) {
  CheckMaskSize("mp2", config.mask_size, x);
  if (config.pixels_per_step < 1) {
    throw ParameterError("mp2: pixels per step must be >= 1");
  }
  if (!(config.stop_prob > 0.0 && config.stop_prob < 1.0)) {
    throw ParameterError("mp2: stop probability must be in (0,1)");
  }
  RequireGradients("mp2", oracle);
  const std::shared_ptr<const FillStrategy> filler =
      config.filler ? config.filler : std::make_shared<BlurFiller>(10.0);
  const int cells = config.mask_size * config.mask_size;
  const int max_steps =
      config.max_steps > 0
          ? config.max_steps
          : (cells + config.pixels_per_step - 1) / config.pixels_per_step;

  Field m(config.mask_size, config.mask_size, 0.0);
  std::size_t ones = 0;
  Mp2Result result;
  std::vector<int> order(cells);
  for (int it = 0;; ++it) {
    Image fill;
    double p;
    try {
      const Image xb = Mp2Perturbed(x, m, *filler, config.probe_block, &fill);
      p = oracle.Score(xb, config.target_class);
      result.trace.push_back({it, p, ones});
      if (p <= config.stop_prob) {
        result.converged = true;
        result.iterations = it;
        break;
      }
      if (it >= max_steps || ones == static_cast<std::size_t>(cells)) {
        result.iterations = it;
        break;
      }
      const Image g_img = oracle.InputGradient(xb, config.target_class);
      const BilinearResizer up(m.height(), m.width(), x.height(), x.width());
      const Field g = up.ApplyAdjoint(MaskContraction(x, fill, g_img));
      if (!AllFinite(g)) throw MethodError("non-finite mask gradient");

      std::iota(order.begin(), order.end(), 0);
      auto key = [&](int i) {
        return config.selection == Mp2Selection::kMostNegative ? -g[i]
                                                               : std::abs(g[i]);
      };
      std::vector<int> zeros;
      for (int i : order) {
        if (m[i] == 0.0) zeros.push_back(i);
      }
      std::stable_sort(zeros.begin(), zeros.end(),
                       [&](int a, int b) { return key(a) > key(b); });
      const int take = std::min<int>(config.pixels_per_step,
                                     static_cast<int>(zeros.size()));
      for (int k = 0; k < take; ++k) {
        m[zeros[k]] = 1.0;
        result.selected.push_back(zeros[k]);
        ++ones;
      }
    } catch (const Error& e) {
      throw MethodError("mp2: iteration " + std::to_string(it) + ": " + e.what());
    }
  }

  Provenance prov;
  prov.method = "mp2";
  prov.params = {{"mask_size", std::to_string(config.mask_size)},
                 {"pixels_per_step", std::to_string(config.pixels_per_step)},
                 {"stop_prob", Num(config.stop_prob)},
                 {"max_steps", std::to_string(max_steps)},
                 {"selection", config.selection == Mp2Selection::kMostNegative
                                   ? "most-negative"
                                   : "largest-magnitude"},
                 {"target_class", std::to_string(config.target_class)},
                 {"converged", result.converged ? "true" : "false"},
                 {"probe_block", std::to_string(config.probe_block > 0
                                                     ? config.probe_block
                                                     : DefaultProbeBlock(x.height(), x.width()))},
                 {"iterations", std::to_string(result.iterations)},
                 {"filler", filler->name()}};
  for (const auto& [k, v] : filler->params()) prov.params["filler." + k] = v;
  result.map = AttributionMap(BilinearResize(m, x.height(), x.width()),
                              std::move(prov));
  result.mask = std::move(m);
  return result;
}

FidoResult FidoAttribute(const Image& x, const ClassifierOracle& oracle,
                         const FidoConfig& config) {
  CheckMaskSize("fido", config.mask_size, x);
  if (config.steps < 1) throw ParameterError("fido: steps must be >= 1");
  if (!(config.lr > 0.0)) throw ParameterError("fido: lr must be > 0");
  if (!(config.reg >= 0.0)) throw ParameterError("fido: reg must be >= 0");
  if (!(config.init >= 0.0 && config.init <= 1.0)) {
    throw ParameterError("fido: init must be in [0,1]");
  }
  if (!(config.beta1 >= 0.0 && config.beta1 < 1.0 && config.beta2 >= 0.0 &&
        config.beta2 < 1.0 && config.epsilon > 0.0)) {
    throw ParameterError("fido: invalid Adam parameters");
  }
  RequireGradients("fido", oracle);
  const std::shared_ptr<const FillStrategy> filler =
      config.filler ? config.filler : std::make_shared<HarmonicInpainter>();

  // m is the infill mask (1 = replaced); the kept region is 1 - m.
  Field m(config.mask_size, config.mask_size, 1.0 - config.init);
  Field adam_m(m.height(), m.width(), 0.0);
  Field adam_v(m.height(), m.width(), 0.0);
  const BilinearResizer up(m.height(), m.width(), x.height(), x.width());
  FidoResult result;
  double b1t = 1.0, b2t = 1.0;
  for (int step = 0; step < config.steps; ++step) {
    Image fill;
    double p;
    Field g;
    try {
      const Image xb = Mp2Perturbed(x, m, *filler, config.probe_block, &fill);
      p = oracle.Score(xb, config.target_class);
      const Image g_img = oracle.InputGradient(xb, config.target_class);
      g = up.ApplyAdjoint(MaskContraction(x, fill, g_img));
    } catch (const Error& e) {
      throw MethodError("fido: step " + std::to_string(step) + ": " + e.what());
    }
    double kept = 0.0;
    for (double v : m.values()) kept += 1.0 - v;
    const double objective = -p + config.reg * kept;
    if (!std::isfinite(objective) || !AllFinite(g)) {
      throw MethodError("fido: non-finite objective at step " +
                        std::to_string(step));
    }
    result.trace.push_back({step, objective, p, kept});
    b1t *= config.beta1;
    b2t *= config.beta2;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double gi = -g[i] - config.reg;
      adam_m[i] = config.beta1 * adam_m[i] + (1.0 - config.beta1) * gi;
      adam_v[i] = config.beta2 * adam_v[i] + (1.0 - config.beta2) * gi * gi;
      const double mhat = adam_m[i] / (1.0 - b1t);
      const double vhat = adam_v[i] / (1.0 - b2t);
      m[i] = std::clamp(m[i] - config.lr * mhat / (std::sqrt(vhat) + config.epsilon),
                        0.0, 1.0);
    }
  }

  Field keep(m.height(), m.width());
  for (std::size_t i = 0; i < m.size(); ++i) keep[i] = 1.0 - m[i];
  Provenance prov;
  prov.method = "fido";
  prov.params = {{"mask_size", std::to_string(config.mask_size)},
                 {"lr", Num(config.lr)},
                 {"reg", Num(config.reg)},
                 {"steps", std::to_string(config.steps)},
                 {"init", Num(config.init)},
                 {"probe_block", std::to_string(config.probe_block > 0
                                                     ? config.probe_block
                                                     : DefaultProbeBlock(x.height(), x.width()))},
                 {"target_class", std::to_string(config.target_class)},
                 {"filler", filler->name()}};
  for (const auto& [k, v] : filler->params()) prov.params["filler." + k] = v;
  result.map = AttributionMap(up.Apply(keep), std::move(prov));
  result.keep = std::move(keep);
  return result;
}

namespace {

std::ofstream OpenCsv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  return out;
}

}  // namespace

void WriteMpTrace(const MpResult& result, const std::filesystem::path& path) {
  std::ofstream out = OpenCsv(path);
  out << "step,total,l1,tv,score,mask_mean\n";
  for (const MpTraceRow& r : result.trace) {
    out << r.step << ',' << r.objective.total << ',' << r.objective.l1 << ','
        << r.objective.tv << ',' << r.objective.score << ',' << r.mask_mean
        << '\n';
  }
}

void WriteMp2Trace(const Mp2Result& result, const std::filesystem::path& path) {
  std::ofstream out = OpenCsv(path);
  out << "iteration,probability,ones\n";
  for (const Mp2TraceRow& r : result.trace) {
    out << r.iteration << ',' << r.probability << ',' << r.ones << '\n';
  }
}

void WriteFidoTrace(const FidoResult& result, const std::filesystem::path& path) {
  std::ofstream out = OpenCsv(path);
  out << "step,objective,probability,kept\n";
  for (const FidoTraceRow& r : result.trace) {
    out << r.step << ',' << r.objective << ',' << r.probability << ','
        << r.kept << '\n';
  }
}

}  // namespace attrib
