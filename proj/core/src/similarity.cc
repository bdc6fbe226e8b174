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

#include "attrib/similarity.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "attrib/error.h"
#include "attrib/image_ops.h"
#include "attrib/log.h"

namespace attrib {
namespace {

void CheckPair(const Field& a, const Field& b, const char* what) {
  if (a.empty() || !a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": inputs must be non-empty and equal-sized");
  }
}

Field MinMax(const Field& f) {
  Field out(f.height(), f.width(), 0.0);
  const double lo = f.min();
  const double span = f.max() - lo;
  if (span > 0.0) {
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = (f[i] - lo) / span;
  }
  return out;
}

struct WindowStats {
  double ssim = 0.0;
  double cs = 0.0;
};

// Means of SSIM and of its contrast-structure term over all windows.
WindowStats Windowed(const Field& a, const Field& b, const SsimOptions& o,
                     double range) {
  if (o.window < 1) throw ParameterError("ssim: window must be >= 1");
  const int wh = std::min(o.window, a.height());
  const int ww = std::min(o.window, a.width());
  const double n = static_cast<double>(wh) * ww;
  const double denom = n > 1.0 ? n - 1.0 : 1.0;
  const double c1 = (o.k1 * range) * (o.k1 * range);
  const double c2 = (o.k2 * range) * (o.k2 * range);
  double ssim_sum = 0.0, cs_sum = 0.0;
  long long count = 0;
  for (int r = 0; r + wh <= a.height(); ++r) {
    for (int c = 0; c + ww <= a.width(); ++c) {
      double sa = 0.0, sb = 0.0;
      for (int i = r; i < r + wh; ++i) {
        for (int j = c; j < c + ww; ++j) {
          sa += a(i, j);
          sb += b(i, j);
        }
      }
      const double ma = sa / n, mb = sb / n;
      double vaa = 0.0, vbb = 0.0, vab = 0.0;
      for (int i = r; i < r + wh; ++i) {
        for (int j = c; j < c + ww; ++j) {
          const double da = a(i, j) - ma, db = b(i, j) - mb;
          vaa += da * da;
          vbb += db * db;
          vab += da * db;
        }
      }
      vaa /= denom;
      vbb /= denom;
      vab /= denom;
      const double cs = (2.0 * vab + c2) / (vaa + vbb + c2);
      const double l = (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
      ssim_sum += l * cs;
      cs_sum += cs;
      ++count;
    }
  }
  return {ssim_sum / count, cs_sum / count};
}

double JointRange(const Field& a, const Field& b) {
  return std::max(a.max(), b.max()) - std::min(a.min(), b.min());
}

Field Downsample2(const Field& f) {
  Field out(f.height() / 2, f.width() / 2);
  for (int r = 0; r < out.height(); ++r) {
    for (int c = 0; c < out.width(); ++c) {
      out(r, c) = 0.25 * (f(2 * r, 2 * c) + f(2 * r, 2 * c + 1) +
                          f(2 * r + 1, 2 * c) + f(2 * r + 1, 2 * c + 1));
    }
  }
  return out;
}

}  // namespace

double Ssim(const Field& a, const Field& b, const SsimOptions& options) {
  CheckPair(a, b, "ssim");
  const double range = options.data_range > 0.0 ? options.data_range : JointRange(a, b);
  if (!(range > 0.0)) {
    Warn("ssim: zero data range; scoring by exact equality");
    return a == b ? 1.0 : 0.0;
  }
  return Windowed(a, b, options, range).ssim;
}

double SsimContrastStructure(const Field& a, const Field& b,
                             const SsimOptions& options) {
  CheckPair(a, b, "ssim");
  const double range = options.data_range > 0.0 ? options.data_range : JointRange(a, b);
  if (!(range > 0.0)) {
    Warn("ssim: zero data range; scoring by exact equality");
    return a == b ? 1.0 : 0.0;
  }
  return Windowed(a, b, options, range).cs;
}

double MsSsim(const Image& x, const Image& y, const MsSsimOptions& options) {
  if (x.empty() || !x.same_shape(y)) {
    throw ShapeError("ms-ssim: inputs must be non-empty and equal-sized");
  }
  if (options.weights.empty()) throw ParameterError("ms-ssim: no scales");
  Field a = Luminance(x);
  Field b = Luminance(y);
  const SsimOptions so{options.window, options.k1, options.k2, 1.0};
  double result = 1.0;
  const std::size_t scales = options.weights.size();
  for (std::size_t s = 0; s < scales; ++s) {
    if (a.height() < 1 || a.width() < 1) {
      throw ParameterError("ms-ssim: image too small for " +
                           std::to_string(scales) + " scales");
    }
    const WindowStats st = Windowed(a, b, so, 1.0);
    const double term = s + 1 == scales ? st.ssim : st.cs;
    result *= std::pow(std::max(term, 0.0), options.weights[s]);
    if (s + 1 < scales) {
      a = Downsample2(a);
      b = Downsample2(b);
    }
  }
  return result;
}

std::vector<double> HogDescriptor(const Field& f) {
  constexpr int kCell = 8;
  constexpr int kBins = 9;
  const int h = f.height(), w = f.width();
  const int ncy = h / kCell, ncx = w / kCell;
  if (ncy < 2 || ncx < 2) {
    throw ParameterError("hog: field must be at least 16x16");
  }
  std::vector<double> cells(static_cast<std::size_t>(ncy) * ncx * kBins, 0.0);
  for (int r = 0; r < ncy * kCell; ++r) {
    for (int c = 0; c < ncx * kCell; ++c) {
      const double gx = (c > 0 && c + 1 < w) ? f(r, c + 1) - f(r, c - 1) : 0.0;
      const double gy = (r > 0 && r + 1 < h) ? f(r + 1, c) - f(r - 1, c) : 0.0;
      const double mag = std::sqrt(gx * gx + gy * gy);
      if (mag == 0.0) continue;
      double theta = std::atan2(gy, gx);
      if (theta < 0.0) theta += M_PI;
      if (theta >= M_PI) theta -= M_PI;
      const int bin = std::min(kBins - 1, static_cast<int>(theta / (M_PI / kBins)));
      cells[(static_cast<std::size_t>(r / kCell) * ncx + c / kCell) * kBins + bin] += mag;
    }
  }
  for (double& v : cells) v /= kCell * kCell;

  std::vector<double> desc;
  desc.reserve(static_cast<std::size_t>(ncy - 1) * (ncx - 1) * 4 * kBins);
  std::vector<double> block(4 * kBins);
  for (int by = 0; by + 1 < ncy; ++by) {
    for (int bx = 0; bx + 1 < ncx; ++bx) {
      std::size_t k = 0;
      for (int dy = 0; dy < 2; ++dy) {
        for (int dx = 0; dx < 2; ++dx) {
          const std::size_t base =
              (static_cast<std::size_t>(by + dy) * ncx + bx + dx) * kBins;
          for (int t = 0; t < kBins; ++t) block[k++] = cells[base + t];
        }
      }
      double norm2 = 0.0;
      for (double v : block) norm2 += v * v;
      const double scale = 1.0 / std::sqrt(norm2 + 1e-10);
      for (double v : block) desc.push_back(v * scale);
    }
  }
  return desc;
}

double Pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw ShapeError("pearson: inputs must be non-empty and equal-sized");
  }
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    Warn("pearson: zero-variance input");
    const bool equal = std::equal(a.begin(), a.end(), b.begin());
    return (saa == 0.0 && sbb == 0.0 && equal) ? 1.0 : 0.0;
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double HogPearson(const Field& a, const Field& b) {
  CheckPair(a, b, "hog");
  return Pearson(HogDescriptor(a), HogDescriptor(b));
}

std::vector<double> AverageRanks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  std::vector<double> ranks(v.size());
  std::size_t start = 0;
  while (start < idx.size()) {
    std::size_t end = start + 1;
    while (end < idx.size() && v[idx[end]] == v[idx[start]]) ++end;
    const double rank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) ranks[idx[k]] = rank;
    start = end;
  }
  return ranks;
}

double Spearman(const Field& a, const Field& b) {
  CheckPair(a, b, "spearman");
  if (a.min() == a.max() || b.min() == b.max()) {
    Warn("spearman: constant map; defined as 0");
    return 0.0;
  }
  const std::vector<double> ra = AverageRanks(a.values());
  const std::vector<double> rb = AverageRanks(b.values());
  return Pearson(ra, rb);
}

double HeatmapSsim(const Field& a, const Field& b) {
  CheckPair(a, b, "ssim");
  const Field na = MinMax(a), nb = MinMax(b);
  if (JointRange(na, nb) == 0.0) {
    Warn("ssim: zero data range; scoring by exact equality");
    return a == b ? 1.0 : 0.0;
  }
  return Ssim(na, nb);
}

double HeatmapHogPearson(const Field& a, const Field& b) {
  CheckPair(a, b, "hog");
  return HogPearson(MinMax(a), MinMax(b));
}

}  // namespace attrib
