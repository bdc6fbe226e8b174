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

#include "attrib/lime.h"

#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "attrib/error.h"
#include "attrib/image_io.h"
#include "attrib/image_ops.h"
#include "attrib/parallel.h"
#include "attrib/random.h"

namespace attrib {
namespace {

void CheckConfig(const LimeConfig& config) {
  if (config.num_samples < 1) throw ParameterError("lime: N must be >= 1");
  if (!(config.kernel_width > 0.0)) {
    throw ParameterError("lime: kernel width must be > 0");
  }
  if (!(config.lasso_lambda >= 0.0)) {
    throw ParameterError("lime: lasso lambda must be >= 0");
  }
  if (config.fit_steps < 1) throw ParameterError("lime: fit steps must be >= 1");
  if (!(config.occlusion_prob >= 0.0 && config.occlusion_prob <= 1.0)) {
    throw ParameterError("lime: occlusion probability must be in [0,1]");
  }
}

double SoftThreshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

std::vector<std::vector<std::uint8_t>> LimePresenceBatch(int num_superpixels,
                                                         int num_samples,
                                                         double occlusion_prob,
                                                         std::uint64_t seed) {
  if (num_superpixels < 1 || num_samples < 1) {
    throw ParameterError("lime: empty presence batch");
  }
  std::vector<std::vector<std::uint8_t>> z(
      num_samples, std::vector<std::uint8_t>(num_superpixels, 1));
  const std::uint64_t s = static_cast<std::uint64_t>(num_superpixels);
  for (int i = 1; i < num_samples; ++i) {
    for (int k = 0; k < num_superpixels; ++k) {
      z[i][k] = CounterUniform(seed, static_cast<std::uint64_t>(i) * s + k) >=
                occlusion_prob;
    }
  }
  return z;
}

std::vector<LimeSample> LimeSampleBatch(const Image& x, const Segmentation& seg,
                                        const ClassifierOracle& oracle,
                                        const LimeConfig& config,
                                        std::uint64_t seed) {
  CheckConfig(config);
  if (seg.height() != x.height() || seg.width() != x.width()) {
    throw ShapeError("lime: segmentation does not match the image");
  }
  const std::shared_ptr<const FillStrategy> filler =
      config.filler ? config.filler : std::make_shared<GrayFiller>();
  const auto presence = LimePresenceBatch(seg.count(), config.num_samples,
                                          config.occlusion_prob, seed);
  const double norm = std::sqrt(static_cast<double>(x.size()));
  const double kw2 = config.kernel_width * config.kernel_width;
  std::vector<LimeSample> samples(presence.size());
  ParallelFor(samples.size(), config.threads, [&](std::size_t i) {
    LimeSample& s = samples[i];
    s.presence = presence[i];
    const PerturbMask m = OcclusionMask(seg, s.presence);
    Image xb;
    try {
      xb = Perturb(x, m, *filler);
      s.score = oracle.Score(xb, config.target_class);
    } catch (const Error& e) {
      throw MethodError("lime: sample " + std::to_string(i) + ": " + e.what());
    }
    double d2 = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double d = x[j] - xb[j];
      d2 += d * d;
    }
    const double d = std::sqrt(d2) / norm;
    s.weight = std::exp(-(d * d) / kw2);
    if (config.keep_images) s.image = std::move(xb);
  });
  return samples;
}

LassoFit WeightedLasso(const std::vector<std::vector<std::uint8_t>>& z,
                       std::span<const double> y, std::span<const double> w,
                       double lambda, int cycles) {
  const std::size_t n = z.size();
  if (n == 0 || y.size() != n || w.size() != n) {
    throw ShapeError("lasso: sample, score and weight counts differ");
  }
  if (!(lambda >= 0.0)) throw ParameterError("lasso: lambda must be >= 0");
  if (cycles < 1) throw ParameterError("lasso: cycles must be >= 1");
  const std::size_t p = z[0].size();
  double wsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (z[i].size() != p) throw ShapeError("lasso: ragged design");
    if (!(w[i] >= 0.0) || !std::isfinite(y[i])) {
      throw ParameterError("lasso: invalid weight or score");
    }
    wsum += w[i];
  }
  if (!(wsum > 0.0)) throw MethodError("lasso: all sample weights are zero");

  // Weighted centering removes the unpenalized intercept.
  std::vector<double> zbar(p, 0.0);
  double ybar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ybar += w[i] * y[i];
    for (std::size_t k = 0; k < p; ++k) zbar[k] += w[i] * z[i][k];
  }
  ybar /= wsum;
  for (double& v : zbar) v /= wsum;
  std::vector<double> xc(n * p);  // column-major: feature k at [k*n, k*n+n)
  std::vector<double> col_norm(p, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double v = z[i][k] - zbar[k];
      xc[k * n + i] = v;
      col_norm[k] += w[i] * v * v;
    }
  }
  bool any_variance = false;
  for (double c : col_norm) any_variance |= c > 1e-12 * wsum;
  if (!any_variance) {
    throw MethodError(
        "lime: every perturbation sample has the same presence pattern "
        "(zero design variance)");
  }

  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - ybar;
  std::vector<double> a(p, 0.0);
  auto objective = [&] {
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) f += w[i] * r[i] * r[i];
    for (double v : a) f += lambda * std::abs(v);
    return f;
  };

  LassoFit fit;
  fit.objective.reserve(cycles);
  double previous = objective();
  for (int cycle = 0; cycle < cycles; ++cycle) {
    for (std::size_t k = 0; k < p; ++k) {
      if (col_norm[k] <= 1e-12 * wsum) continue;
      const double* col = &xc[k * n];
      double rho = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        rho += w[i] * col[i] * (r[i] + col[i] * a[k]);
      }
      const double updated = SoftThreshold(rho, 0.5 * lambda) / col_norm[k];
      const double delta = updated - a[k];
      if (delta != 0.0) {
        for (std::size_t i = 0; i < n; ++i) r[i] -= col[i] * delta;
        a[k] = updated;
      }
    }
    const double current = objective();
    if (current > previous + 1e-9 * (1.0 + std::abs(previous))) {
      throw MethodError("lasso: objective increased at cycle " +
                        std::to_string(cycle));
    }
    fit.objective.push_back(current);
    previous = current;
  }
  fit.coefficients = a;
  fit.intercept = ybar;
  for (std::size_t k = 0; k < p; ++k) fit.intercept -= zbar[k] * a[k];
  return fit;
}

LimeResult LimeFit(const Image& x, const Segmentation& seg,
                   const ClassifierOracle& oracle, const LimeConfig& config) {
  CheckConfig(config);
  if (seg.count() < 2) {
    throw MethodError("lime: segmentation produced " +
                      std::to_string(seg.count()) + " superpixel(s), need >= 2");
  }
  LimeResult result;
  result.segmentation = seg;
  result.samples = LimeSampleBatch(x, seg, oracle, config, config.seed);
  std::vector<std::vector<std::uint8_t>> z;
  std::vector<double> y, w;
  z.reserve(result.samples.size());
  for (const LimeSample& s : result.samples) {
    z.push_back(s.presence);
    y.push_back(s.score);
    w.push_back(s.weight);
  }
  result.fit = WeightedLasso(z, y, w, config.lasso_lambda, config.fit_steps);

  Provenance prov;
  prov.method = "lime";
  const std::shared_ptr<const FillStrategy> filler =
      config.filler ? config.filler : std::make_shared<GrayFiller>();
  prov.params = {{"segments", std::to_string(config.num_segments)},
                 {"segments_produced", std::to_string(seg.count())},
                 {"samples", std::to_string(config.num_samples)},
                 {"kernel_width", std::to_string(config.kernel_width)},
                 {"lasso_lambda", std::to_string(config.lasso_lambda)},
                 {"fit_steps", std::to_string(config.fit_steps)},
                 {"occlusion_prob", std::to_string(config.occlusion_prob)},
                 {"seed", std::to_string(config.seed)},
                 {"target_class", std::to_string(config.target_class)},
                 {"filler", filler->name()}};
  for (const auto& [k, v] : filler->params()) prov.params["filler." + k] = v;
  result.map =
      AttributionMap(PaintSuperpixels(seg, result.fit.coefficients), std::move(prov));
  return result;
}

LimeResult LimeAttribute(const Image& x, const ClassifierOracle& oracle,
                         const LimeConfig& config) {
  CheckConfig(config);
  SlicOptions slic;
  slic.num_segments = config.num_segments;
  slic.compactness = config.compactness;
  slic.iterations = config.slic_iterations;
  return LimeFit(x, Slic(x, slic), oracle, config);
}

void WriteLimeSamples(const LimeResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "samples.csv");
  if (!out) throw IoError("cannot write " + (dir / "samples.csv").string());
  out.precision(17);
  out << "index,presence,score,weight\n";
  for (std::size_t i = 0; i < result.samples.size(); ++i) {
    const LimeSample& s = result.samples[i];
    out << i << ',';
    for (std::uint8_t b : s.presence) out << (b ? '1' : '0');
    out << ',' << s.score << ',' << s.weight << '\n';
    if (s.image) WriteImage(*s.image, dir / ("sample_" + std::to_string(i) + ".png"));
  }
  if (!out) throw IoError("cannot write " + (dir / "samples.csv").string());
}

}  // namespace attrib
