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

#include "attrib/fillers.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <sstream>
#include <utility>

#include "attrib/error.h"
#include "attrib/image_io.h"
#include "attrib/image_ops.h"
#include "attrib/random.h"
#include "attrib/subprocess.h"

namespace attrib {
namespace {

std::string Num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void CheckMask(const Image& x, const PerturbMask& mask) {
  if (!x.same_spatial(mask.values())) {
    throw ShapeError("filler: mask " + std::to_string(mask.height()) + "x" +
                     std::to_string(mask.width()) + " does not match image " +
                     std::to_string(x.height()) + "x" +
                     std::to_string(x.width()));
  }
}

}  // namespace

Image Perturb(const Image& x, const PerturbMask& mask,
              const FillStrategy& filler) {
  return Composite(x, mask, filler.Fill(x, mask));
}

int DefaultProbeBlock(int height, int width) {
  return std::max(1, (std::min(height, width) + 7) / 8);
}

Image DenseFill(const Image& x, const PerturbMask& mask,
                const FillStrategy& filler, int block_size) {
  if (!x.same_spatial(mask.values())) {
    throw ShapeError("dense fill: mask and image sizes differ");
  }
  if (block_size < 1 || block_size >= std::max(x.height(), x.width())) {
    throw ParameterError("dense fill: block size must be in [1, max(H, W))");
  }
  const PerturbMask binary = mask.Binarized(0.5);
  const std::size_t n = x.pixel_count();
  const bool full = binary.CountOnes() == n;
  if (!filler.depends_on_mask() && !full) return filler.Fill(x, binary);

  Image out = full ? Image(x.height(), x.width()) : filler.Fill(x, binary);
  for (int phase = 0; phase < 2; ++phase) {
    Field probe(x.height(), x.width(), 0.0);
    std::size_t ones = 0;
    bool any = false;
    for (int r = 0; r < x.height(); ++r) {
      for (int c = 0; c < x.width(); ++c) {
        const bool in_phase = (r / block_size + c / block_size) % 2 == phase;
        const bool masked = binary(r, c) == 1.0;
        if (in_phase && !masked) any = true;
        if (in_phase || (masked && !full)) {
          probe(r, c) = 1.0;
          ++ones;
        }
      }
    }
    if (!any && !full) continue;
    if (ones == n) {
      // The probe would swallow the image; fall back to the phase alone.
      for (int r = 0; r < x.height(); ++r) {
        for (int c = 0; c < x.width(); ++c) {
          probe(r, c) = (r / block_size + c / block_size) % 2 == phase ? 1.0 : 0.0;
        }
      }
    }
    const Image f = filler.Fill(x, PerturbMask(std::move(probe), MaskKind::kBinary));
    for (int r = 0; r < x.height(); ++r) {
      for (int c = 0; c < x.width(); ++c) {
        if ((r / block_size + c / block_size) % 2 != phase) continue;
        if (!full && binary(r, c) == 1.0) continue;
        for (int ch = 0; ch < 3; ++ch) out(r, c, ch) = f(r, c, ch);
      }
    }
  }
  return out;
}

GrayFiller::GrayFiller(std::array<double, 3> color) : color_(color) {
  for (double c : color_) {
    if (!(c >= 0.0 && c <= 1.0)) {
      throw ParameterError("gray filler color must be in [0,1]");
    }
  }
}

std::map<std::string, std::string> GrayFiller::params() const {
  return {{"color", Num(color_[0]) + "," + Num(color_[1]) + "," +
                        Num(color_[2])}};
}

Image GrayFiller::Fill(const Image& x, const PerturbMask& mask) const {
  CheckMask(x, mask);
  return Image::Filled(x.height(), x.width(), color_[0], color_[1], color_[2]);
}

std::map<std::string, std::string> NoiseFiller::params() const {
  return {{"seed", std::to_string(seed_)}};
}

Image NoiseFiller::Fill(const Image& x, const PerturbMask& mask) const {
  CheckMask(x, mask);
  Image out(x.height(), x.width());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = CounterUniform24(seed_, i);
  }
  return out;
}

BlurFiller::BlurFiller(double sigma) : sigma_(sigma) {
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) {
    throw ParameterError("blur filler requires sigma > 0");
  }
}

std::map<std::string, std::string> BlurFiller::params() const {
  return {{"sigma", Num(sigma_)}};
}

Image BlurFiller::Fill(const Image& x, const PerturbMask& mask) const {
  CheckMask(x, mask);
  return GaussianBlur(x, sigma_);
}

Image IdentityFiller::Fill(const Image& x, const PerturbMask& mask) const {
  CheckMask(x, mask);
  return x;
}

namespace {

// Push-pull interpolation of the unknown pixels (weight 0) from the known
// ones. Every output value is a convex combination of known values.
void PushPull(std::vector<double>& values, std::vector<double> weight, int h,
              int w) {
  struct Level {
    int h, w;
    std::vector<double> v;  // 3 per pixel
    std::vector<double> wt;
  };
  std::vector<Level> levels;
  levels.push_back({h, w, values, std::move(weight)});
  while (levels.back().h > 1 || levels.back().w > 1) {
    const Level& f = levels.back();
    Level c{(f.h + 1) / 2, (f.w + 1) / 2, {}, {}};
    c.v.assign(static_cast<std::size_t>(c.h) * c.w * 3, 0.0);
    c.wt.assign(static_cast<std::size_t>(c.h) * c.w, 0.0);
    for (int r = 0; r < f.h; ++r) {
      for (int col = 0; col < f.w; ++col) {
        const std::size_t fi = static_cast<std::size_t>(r) * f.w + col;
        const std::size_t ci = static_cast<std::size_t>(r / 2) * c.w + col / 2;
        const double fw = f.wt[fi];
        if (fw == 0.0) continue;
        c.wt[ci] += fw;
        for (int ch = 0; ch < 3; ++ch) c.v[ci * 3 + ch] += fw * f.v[fi * 3 + ch];
      }
    }
    for (std::size_t i = 0; i < c.wt.size(); ++i) {
      if (c.wt[i] > 0.0) {
        for (int ch = 0; ch < 3; ++ch) c.v[i * 3 + ch] /= c.wt[i];
        c.wt[i] = std::min(1.0, c.wt[i]);
      }
    }
    levels.push_back(std::move(c));
  }
  for (std::size_t l = levels.size() - 1; l-- > 0;) {
    Level& f = levels[l];
    const Level& c = levels[l + 1];
    for (int r = 0; r < f.h; ++r) {
      for (int col = 0; col < f.w; ++col) {
        const std::size_t fi = static_cast<std::size_t>(r) * f.w + col;
        const double fw = f.wt[fi];
        if (fw >= 1.0) continue;
        const std::size_t ci = static_cast<std::size_t>(r / 2) * c.w + col / 2;
        for (int ch = 0; ch < 3; ++ch) {
          f.v[fi * 3 + ch] = fw * f.v[fi * 3 + ch] + (1.0 - fw) * c.v[ci * 3 + ch];
        }
      }
    }
  }
  values = std::move(levels.front().v);
}

}  // namespace

Image HarmonicInpaint(const Image& x, const PerturbMask& mask,
                      const InpaintOptions& options, InpaintStats* stats) {
  CheckMask(x, mask);
  if (options.max_iterations < 0) {
    throw ParameterError("inpaint iterations must be >= 0");
  }
  if (!(options.tolerance >= 0.0)) {
    throw ParameterError("inpaint tolerance must be >= 0");
  }
  const int h = x.height();
  const int w = x.width();
  const std::size_t n = x.pixel_count();
  std::vector<std::uint8_t> hole(n);
  std::size_t hole_count = 0;
  for (std::size_t p = 0; p < n; ++p) {
    hole[p] = mask[p] >= 0.5;
    hole_count += hole[p];
  }
  if (stats) *stats = {};
  if (hole_count == 0) {
    if (stats) stats->converged = true;
    return x;
  }
  if (hole_count == n) {
    throw MethodError("inpaint: the mask covers the whole image, no boundary");
  }

  // Connected hole components and their boundary ranges per channel.
  std::vector<int> comp(n, -1);
  std::vector<std::array<double, 6>> range;  // min r,g,b then max r,g,b
  std::vector<std::size_t> hole_pixels;
  hole_pixels.reserve(hole_count);
  std::deque<std::size_t> queue;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!hole[seed] || comp[seed] >= 0) continue;
    const int id = static_cast<int>(range.size());
    std::array<double, 6> rg = {1e300, 1e300, 1e300, -1e300, -1e300, -1e300};
    comp[seed] = id;
    queue.push_back(seed);
    while (!queue.empty()) {
      const std::size_t p = queue.front();
      queue.pop_front();
      const int r = static_cast<int>(p / w), c = static_cast<int>(p % w);
      const int nr[4] = {r - 1, r + 1, r, r};
      const int nc[4] = {c, c, c - 1, c + 1};
      for (int k = 0; k < 4; ++k) {
        if (nr[k] < 0 || nr[k] >= h || nc[k] < 0 || nc[k] >= w) continue;
        const std::size_t q = static_cast<std::size_t>(nr[k]) * w + nc[k];
        if (hole[q]) {
          if (comp[q] < 0) {
            comp[q] = id;
            queue.push_back(q);
          }
        } else {
          for (int ch = 0; ch < 3; ++ch) {
            rg[ch] = std::min(rg[ch], x[q * 3 + ch]);
            rg[3 + ch] = std::max(rg[3 + ch], x[q * 3 + ch]);
          }
        }
      }
    }
    range.push_back(rg);
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (hole[p]) hole_pixels.push_back(p);
  }

  std::vector<double> v(x.values().begin(), x.values().end());
  std::vector<double> weight(n);
  for (std::size_t p = 0; p < n; ++p) weight[p] = hole[p] ? 0.0 : 1.0;
  PushPull(v, std::move(weight), h, w);
  for (std::size_t p : hole_pixels) {
    const auto& rg = range[comp[p]];
    for (int ch = 0; ch < 3; ++ch) {
      v[p * 3 + ch] = std::clamp(v[p * 3 + ch], rg[ch], rg[3 + ch]);
    }
  }

  // Neighbor lists (reflecting borders: missing neighbors are skipped).
  std::vector<std::array<std::size_t, 4>> nbrs(hole_pixels.size());
  std::vector<int> nbr_count(hole_pixels.size());
  for (std::size_t i = 0; i < hole_pixels.size(); ++i) {
    const std::size_t p = hole_pixels[i];
    const int r = static_cast<int>(p / w), c = static_cast<int>(p % w);
    int k = 0;
    if (r > 0) nbrs[i][k++] = p - w;
    if (r + 1 < h) nbrs[i][k++] = p + w;
    if (c > 0) nbrs[i][k++] = p - 1;
    if (c + 1 < w) nbrs[i][k++] = p + 1;
    nbr_count[i] = k;
  }

  const bool jacobi = options.schedule == InpaintSchedule::kJacobi;
  std::vector<double> next;
  bool converged = false;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (jacobi) next = v;
    std::vector<double>& dst = jacobi ? next : v;
    double max_update = 0.0;
    for (std::size_t i = 0; i < hole_pixels.size(); ++i) {
      const std::size_t p = hole_pixels[i];
      const double inv = 1.0 / nbr_count[i];
      for (int ch = 0; ch < 3; ++ch) {
        double s = 0.0;
        for (int k = 0; k < nbr_count[i]; ++k) s += v[nbrs[i][k] * 3 + ch];
        const double value = s * inv;
        max_update = std::max(max_update, std::abs(value - v[p * 3 + ch]));
        dst[p * 3 + ch] = value;
      }
    }
    if (jacobi) v.swap(next);
    if (stats) stats->max_updates.push_back(max_update);
    if (max_update < options.tolerance) {
      converged = true;
      ++it;
      break;
    }
  }
  if (stats) {
    stats->iterations = it;
    stats->converged = converged;
  }
  Image out(h, w);
  std::copy(v.begin(), v.end(), out.values().begin());
  return out;
}

HarmonicInpainter::HarmonicInpainter(InpaintOptions options)
    : options_(options) {
  if (options_.max_iterations < 0) {
    throw ParameterError("inpaint iterations must be >= 0");
  }
  if (!(options_.tolerance >= 0.0)) {
    throw ParameterError("inpaint tolerance must be >= 0");
  }
}

std::map<std::string, std::string> HarmonicInpainter::params() const {
  return {{"iterations", std::to_string(options_.max_iterations)},
          {"tolerance", Num(options_.tolerance)}};
}

Image HarmonicInpainter::Fill(const Image& x, const PerturbMask& mask) const {
  return HarmonicInpaint(x, mask, options_);
}

std::vector<std::uint8_t> EncodeInpaintMask(const PerturbMask& mask) {
  std::vector<std::uint8_t> out(mask.values().size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mask[i] >= 0.5 ? 255 : 0;
  return out;
}

ExternalInpainter::ExternalInpainter(std::string command,
                                     ExternalInpainterOptions options)
    : command_(std::move(command)), options_(options) {
  if (command_.empty()) throw ParameterError("inpainter command is empty");
  if (options_.max_parallel < 1) {
    throw ParameterError("inpainter parallelism must be >= 1");
  }
  if (options_.native_size < 0) {
    throw ParameterError("inpainter native size must be >= 0");
  }
}

std::map<std::string, std::string> ExternalInpainter::params() const {
  return {{"command", command_},
          {"timeout_ms", std::to_string(options_.timeout.count())},
          {"native_size", std::to_string(options_.native_size)}};
}

Image ExternalInpainter::Fill(const Image& x, const PerturbMask& mask) const {
  CheckMask(x, mask);
  PerturbMask binary = mask.Binarized(0.5);
  Image send = x;
  const int ns = options_.native_size;
  if (ns > 0 && (x.height() != ns || x.width() != ns)) {
    send = BilinearResize(x, ns, ns);
    binary = PerturbMask(BilinearResize(binary.values(), ns, ns), MaskKind::kContinuous)
                 .Binarized(0.5);
  }

  TempDir dir("attrib-inpaint");
  const auto image_path = dir.path() / "image.png";
  const auto mask_path = dir.path() / "mask.png";
  const auto out_path = dir.path() / "out.png";
  WriteImage(send, image_path);
  const std::vector<std::uint8_t> bytes = EncodeInpaintMask(binary);
  Field plane(binary.height(), binary.width());
  for (std::size_t i = 0; i < bytes.size(); ++i) plane[i] = bytes[i] / 255.0;
  WriteGrayPng(plane, mask_path);

  ProcessResult result;
  {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] { return running_ < options_.max_parallel; });
    ++running_;
  }
  try {
    result = RunShellCommand(
        command_, {image_path.string(), mask_path.string(), out_path.string()},
        options_.timeout);
  } catch (...) {
    std::lock_guard<std::mutex> lock(mu_);
    --running_;
    cv_.notify_one();
    throw;
  }
  {
    std::lock_guard<std::mutex> lock(mu_);
    --running_;
  }
  cv_.notify_one();

  if (result.timed_out) {
    throw IoError("inpainter '" + command_ + "' timed out after " +
                  std::to_string(options_.timeout.count()) + " ms");
  }
  if (result.exit_code != 0) {
    throw IoError("inpainter '" + command_ + "' exited with status " +
                  std::to_string(result.exit_code) + ": " + result.output);
  }
  if (!std::filesystem::exists(out_path)) {
    throw IoError("inpainter '" + command_ + "' produced no output image");
  }
  Image filled = ReadImage(out_path);
  if (!filled.same_shape(send)) {
    throw IoError("inpainter output is " + std::to_string(filled.height()) +
                  "x" + std::to_string(filled.width()) + ", expected " +
                  std::to_string(send.height()) + "x" +
                  std::to_string(send.width()));
  }
  if (!filled.same_shape(x)) filled = BilinearResize(filled, x.height(), x.width());
  return filled;
}

std::uint64_t HashValues(std::span<const double> values) {
  std::uint64_t hsh = Mix64(values.size());
  for (double v : values) hsh = Mix64(hsh ^ std::bit_cast<std::uint64_t>(v));
  return hsh;
}

CachedFiller::CachedFiller(std::shared_ptr<const FillStrategy> inner,
                           std::size_t capacity)
    : inner_(std::move(inner)), capacity_(capacity) {
  if (!inner_) throw ParameterError("cached filler needs a strategy");
}

Image CachedFiller::Fill(const Image& x, const PerturbMask& mask) const {
  const std::pair<std::uint64_t, std::uint64_t> key = {
      HashValues(x.values()) ^ Mix64(static_cast<std::uint64_t>(x.height())),
      HashValues(mask.values().values())};
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) {
      ++hits_;
      return it->second;
    }
    ++misses_;
  }
  Image filled = inner_->Fill(x, mask);
  std::lock_guard<std::mutex> lock(mu_);
  if (cache_.size() >= capacity_) cache_.clear();
  cache_.emplace(key, filled);
  return filled;
}

std::size_t CachedFiller::hits() const {
  std::lock_guard<std::mutex> lock(mu_);
  return hits_;
}

std::size_t CachedFiller::misses() const {
  std::lock_guard<std::mutex> lock(mu_);
  return misses_;
}

}  // namespace attrib
