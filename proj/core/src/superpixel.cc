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

#include "attrib/superpixel.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <limits>
#include <string>

#include "attrib/error.h"
#include "attrib/image_io.h"
#include "attrib/random.h"

namespace attrib {

Segmentation::Segmentation(int height, int width, std::vector<int> labels)
    : height_(height), width_(width), labels_(std::move(labels)) {
  if (height_ < 1 || width_ < 1 ||
      labels_.size() != static_cast<std::size_t>(height_) * width_) {
    throw ShapeError("segmentation labels do not match its size");
  }
  int max_label = -1;
  for (int l : labels_) {
    if (l < 0) throw ShapeError("segmentation has a negative label");
    max_label = std::max(max_label, l);
  }
  pixels_.resize(static_cast<std::size_t>(max_label) + 1);
  for (std::size_t p = 0; p < labels_.size(); ++p) pixels_[labels_[p]].push_back(p);
  for (const auto& list : pixels_) {
    if (list.empty()) throw ShapeError("segmentation labels are not contiguous");
  }
}

namespace {

struct Center {
  double r, c;       // position
  double l[3];       // scaled color
};

constexpr double kColorScale = 100.0;

// Splits every label into 4-connected components and merges all but the
// largest component of each label into a neighbor; returns labels renumbered
// in row-major order of first appearance.
std::vector<int> EnforceConnectivity(const std::vector<int>& labels, int h,
                                     int w) {
  const std::size_t n = labels.size();
  std::vector<int> comp(n, -1);
  std::vector<int> comp_label;
  std::vector<std::size_t> comp_size;
  std::deque<std::size_t> queue;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    const int id = static_cast<int>(comp_label.size());
    comp[s] = id;
    queue.push_back(s);
    std::size_t size = 0;
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      ++size;
      const int r = static_cast<int>(p / w), c = static_cast<int>(p % w);
      const int nr[4] = {r - 1, r + 1, r, r};
      const int nc[4] = {c, c, c - 1, c + 1};
      for (int k = 0; k < 4; ++k) {
        if (nr[k] < 0 || nr[k] >= h || nc[k] < 0 || nc[k] >= w) continue;
        const std::size_t q = static_cast<std::size_t>(nr[k]) * w + nc[k];
        if (comp[q] < 0 && labels[q] == labels[s]) {
          comp[q] = id;
          queue.push_back(q);
        }
      }
    }
    comp_label.push_back(labels[s]);
    comp_size.push_back(size);
  }
  const int num_comps = static_cast<int>(comp_label.size());

  // Main component per label: the largest, first discovered on ties.
  std::vector<int> main_of_label(
      *std::max_element(labels.begin(), labels.end()) + 1, -1);
  for (int id = 0; id < num_comps; ++id) {
    int& m = main_of_label[comp_label[id]];
    if (m < 0 || comp_size[id] > comp_size[m]) m = id;
  }

  // Component adjacency.
  std::vector<std::vector<int>> adj(num_comps);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t p = static_cast<std::size_t>(r) * w + c;
      if (c + 1 < w && comp[p] != comp[p + 1]) {
        adj[comp[p]].push_back(comp[p + 1]);
        adj[comp[p + 1]].push_back(comp[p]);
      }
      if (r + 1 < h && comp[p] != comp[p + w]) {
        adj[comp[p]].push_back(comp[p + w]);
        adj[comp[p + w]].push_back(comp[p]);
      }
    }
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }

  // group[id] = main component the fragment ends up in (-1 while pending).
  std::vector<int> group(num_comps, -1);
  std::vector<std::size_t> group_size(num_comps, 0);
  for (int id = 0; id < num_comps; ++id) {
    if (main_of_label[comp_label[id]] == id) {
      group[id] = id;
      group_size[id] = comp_size[id];
    }
  }
  bool pending = true;
  while (pending) {
    pending = false;
    for (int id = 0; id < num_comps; ++id) {
      if (group[id] >= 0) continue;
      int best = -1;
      for (int nb : adj[id]) {
        const int g = group[nb];
        if (g < 0) continue;
        if (best < 0 || group_size[g] > group_size[best] ||
            (group_size[g] == group_size[best] && g < best)) {
          best = g;
        }
      }
      if (best < 0) {
        pending = true;
        continue;
      }
      group[id] = best;
      group_size[best] += comp_size[id];
    }
  }

  std::vector<int> relabel(num_comps, -1);
  std::vector<int> out(n);
  int next = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const int g = group[comp[p]];
    if (relabel[g] < 0) relabel[g] = next++;
    out[p] = relabel[g];
  }
  return out;
}

}  // namespace

Segmentation Slic(const Image& x, const SlicOptions& options) {
  if (x.empty()) throw ShapeError("slic: empty image");
  const int h = x.height();
  const int w = x.width();
  const std::size_t n = x.pixel_count();
  if (options.num_segments < 2 ||
      static_cast<std::size_t>(options.num_segments) > n) {
    throw ParameterError("slic: segment count " +
                         std::to_string(options.num_segments) +
                         " outside [2, pixel count]");
  }
  if (!(options.compactness > 0.0)) {
    throw ParameterError("slic: compactness must be > 0");
  }
  if (options.iterations < 1) throw ParameterError("slic: iterations must be >= 1");

  auto color = [&](int r, int c, int ch) { return x(r, c, ch) * kColorScale; };
  auto grad = [&](int r, int c) {
    const int r0 = std::max(r - 1, 0), r1 = std::min(r + 1, h - 1);
    const int c0 = std::max(c - 1, 0), c1 = std::min(c + 1, w - 1);
    double g = 0.0;
    for (int ch = 0; ch < 3; ++ch) {
      const double dx = color(r, c1, ch) - color(r, c0, ch);
      const double dy = color(r1, c, ch) - color(r0, c, ch);
      g += dx * dx + dy * dy;
    }
    return g;
  };

  const double step = std::sqrt(static_cast<double>(n) / options.num_segments);
  const int ny = std::max(1, static_cast<int>(std::lround(h / step)));
  const int nx = std::max(1, static_cast<int>(std::lround(w / step)));
  std::vector<Center> centers;
  for (int i = 0; i < ny; ++i) {
    for (int j = 0; j < nx; ++j) {
      int r = std::min(h - 1, static_cast<int>((i + 0.5) * h / ny));
      int c = std::min(w - 1, static_cast<int>((j + 0.5) * w / nx));
      int best_r = r, best_c = c;
      double best = grad(r, c);
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
          const double g = grad(rr, cc);
          if (g < best) {
            best = g;
            best_r = rr;
            best_c = cc;
          }
        }
      }
      centers.push_back({static_cast<double>(best_r),
                         static_cast<double>(best_c),
                         {color(best_r, best_c, 0), color(best_r, best_c, 1),
                          color(best_r, best_c, 2)}});
    }
  }

  const double spatial_weight =
      (options.compactness * options.compactness) / (step * step);
  const int window = static_cast<int>(std::ceil(step));
  std::vector<int> labels(n, -1);
  std::vector<double> dist(n);
  for (int it = 0; it < options.iterations; ++it) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    std::fill(labels.begin(), labels.end(), -1);
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const Center& ct = centers[k];
      const int r0 = std::max(0, static_cast<int>(std::floor(ct.r)) - window);
      const int r1 = std::min(h - 1, static_cast<int>(std::ceil(ct.r)) + window);
      const int c0 = std::max(0, static_cast<int>(std::floor(ct.c)) - window);
      const int c1 = std::min(w - 1, static_cast<int>(std::ceil(ct.c)) + window);
      for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
          double dc = 0.0;
          for (int ch = 0; ch < 3; ++ch) {
            const double d = color(r, c, ch) - ct.l[ch];
            dc += d * d;
          }
          const double dr = r - ct.r, dcol = c - ct.c;
          const double d = dc + spatial_weight * (dr * dr + dcol * dcol);
          const std::size_t p = static_cast<std::size_t>(r) * w + c;
          if (d < dist[p]) {
            dist[p] = d;
            labels[p] = static_cast<int>(k);
          }
        }
      }
    }
    // Pixels outside every window go to the spatially nearest center.
    for (std::size_t p = 0; p < n; ++p) {
      if (labels[p] >= 0) continue;
      const double r = static_cast<double>(p / w), c = static_cast<double>(p % w);
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < centers.size(); ++k) {
        const double d = (r - centers[k].r) * (r - centers[k].r) +
                         (c - centers[k].c) * (c - centers[k].c);
        if (d < best) {
          best = d;
          labels[p] = static_cast<int>(k);
        }
      }
    }
    std::vector<double> acc(centers.size() * 5, 0.0);
    std::vector<std::size_t> cnt(centers.size(), 0);
    for (std::size_t p = 0; p < n; ++p) {
      const int k = labels[p];
      const int r = static_cast<int>(p / w), c = static_cast<int>(p % w);
      acc[k * 5 + 0] += r;
      acc[k * 5 + 1] += c;
      for (int ch = 0; ch < 3; ++ch) acc[k * 5 + 2 + ch] += color(r, c, ch);
      ++cnt[k];
    }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (cnt[k] == 0) continue;
      const double inv = 1.0 / static_cast<double>(cnt[k]);
      centers[k].r = acc[k * 5 + 0] * inv;
      centers[k].c = acc[k * 5 + 1] * inv;
      for (int ch = 0; ch < 3; ++ch) centers[k].l[ch] = acc[k * 5 + 2 + ch] * inv;
    }
  }
  return Segmentation(h, w, EnforceConnectivity(labels, h, w));
}

PerturbMask SuperpixelMask(const Segmentation& seg, std::span<const int> subset) {
  Field m(seg.height(), seg.width(), 0.0);
  for (int k : subset) {
    if (k < 0 || k >= seg.count()) {
      throw ParameterError("superpixel id " + std::to_string(k) +
                           " out of range");
    }
    for (std::size_t p : seg.pixels(k)) m[p] = 1.0;
  }
  return PerturbMask(std::move(m), MaskKind::kBinary);
}

PerturbMask OcclusionMask(const Segmentation& seg,
                          std::span<const std::uint8_t> presence) {
  if (presence.size() != static_cast<std::size_t>(seg.count())) {
    throw ShapeError("presence vector length does not match superpixel count");
  }
  Field m(seg.height(), seg.width(), 0.0);
  for (int k = 0; k < seg.count(); ++k) {
    if (presence[k]) continue;
    for (std::size_t p : seg.pixels(k)) m[p] = 1.0;
  }
  return PerturbMask(std::move(m), MaskKind::kBinary);
}

Field PaintSuperpixels(const Segmentation& seg, std::span<const double> values) {
  if (values.size() != static_cast<std::size_t>(seg.count())) {
    throw ShapeError("value count does not match superpixel count");
  }
  Field out(seg.height(), seg.width(), 0.0);
  for (int k = 0; k < seg.count(); ++k) {
    for (std::size_t p : seg.pixels(k)) out[p] = values[k];
  }
  return out;
}

namespace {

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}

std::uint32_t GetU32(const std::vector<std::uint8_t>& b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[at + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> EncodeSegmentation(const Segmentation& seg) {
  std::vector<std::uint8_t> out = {'S', 'E', 'G', 'M', kSegmentationVersion};
  PutU32(out, static_cast<std::uint32_t>(seg.width()));
  PutU32(out, static_cast<std::uint32_t>(seg.height()));
  for (int l : seg.labels()) PutU32(out, static_cast<std::uint32_t>(l));
  return out;
}

Segmentation DecodeSegmentation(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 13 || std::memcmp(bytes.data(), "SEGM", 4) != 0) {
    throw IoError("not a SEGM file");
  }
  if (bytes[4] != kSegmentationVersion) throw IoError("unsupported SEGM version");
  const std::uint64_t w = GetU32(bytes, 5);
  const std::uint64_t h = GetU32(bytes, 9);
  if (w == 0 || h == 0 || w * h > (1ull << 28) ||
      bytes.size() != 13 + w * h * 4) {
    throw IoError("SEGM file size does not match its header");
  }
  std::vector<int> labels(w * h);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::uint32_t v = GetU32(bytes, 13 + i * 4);
    if (v > (1u << 30)) throw IoError("SEGM label out of range");
    labels[i] = static_cast<int>(v);
  }
  try {
    return Segmentation(static_cast<int>(h), static_cast<int>(w), std::move(labels));
  } catch (const ShapeError& e) {
    throw IoError(std::string("invalid SEGM labels: ") + e.what());
  }
}

void WriteSegmentation(const Segmentation& seg,
                       const std::filesystem::path& png_path,
                       const std::filesystem::path& raw_path) {
  Image vis(seg.height(), seg.width());
  for (int k = 0; k < seg.count(); ++k) {
    double rgb[3];
    for (int ch = 0; ch < 3; ++ch) {
      rgb[ch] = 0.15 + 0.85 * CounterUniform(0x5e6d, static_cast<std::uint64_t>(k) * 3 + ch);
    }
    for (std::size_t p : seg.pixels(k)) {
      for (int ch = 0; ch < 3; ++ch) vis[p * 3 + ch] = rgb[ch];
    }
  }
  WriteImage(vis, png_path);
  WriteFileBytes(EncodeSegmentation(seg), raw_path);
}

}  // namespace attrib
