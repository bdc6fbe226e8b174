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

#ifndef ATTRIB_FILLERS_H_
#define ATTRIB_FILLERS_H_

#include <array>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "attrib/image.h"

namespace attrib {

// Produces the filler image f that replaces masked pixels. Callers always
// re-composite x * (1 - m) + f * m, so unmasked pixels are never altered by
// a filler. Implementations must be safe to call concurrently.
class FillStrategy {
 public:
  virtual ~FillStrategy() = default;
  // Short identifier ("gray", "noise", "blur", "inpaint", ...).
  virtual std::string name() const = 0;
  // Hyperparameters, for provenance records.
  virtual std::map<std::string, std::string> params() const { return {}; }
  // Filler image in [0,1] with the shape of x.
  virtual Image Fill(const Image& x, const PerturbMask& mask) const = 0;
  // False when Fill ignores the mask (constant, noise, blur).
  virtual bool depends_on_mask() const { return true; }
};

// composite(x, mask, filler.Fill(x, mask)).
Image Perturb(const Image& x, const PerturbMask& mask,
              const FillStrategy& filler);

// Filler prediction for every pixel, not only the masked ones. An inpainter
// leaves unmasked pixels at x, which gives a mask gradient of zero there; so
// each unmasked pixel instead takes the fill it receives when its block of a
// block_size checkerboard is masked too (two extra Fill calls). Masked pixels
// keep filler.Fill(x, mask). Mask-independent fillers return Fill directly.
// A mask that covers the image is served by the checkerboard alone.
Image DenseFill(const Image& x, const PerturbMask& mask,
                const FillStrategy& filler, int block_size);

// Default checkerboard block: ceil(min(H, W) / 8).
int DefaultProbeBlock(int height, int width);

inline constexpr std::array<double, 3> kImageNetMean = {0.485, 0.456, 0.406};

// Constant color image.
class GrayFiller : public FillStrategy {
 public:
  explicit GrayFiller(std::array<double, 3> color = kImageNetMean);
  std::string name() const override { return "gray"; }
  std::map<std::string, std::string> params() const override;
  Image Fill(const Image& x, const PerturbMask& mask) const override;
  bool depends_on_mask() const override { return false; }
  const std::array<double, 3>& color() const { return color_; }

 private:
  std::array<double, 3> color_;
};

// I.i.d. uniform noise; value i of the flat (row, col, channel) buffer is
// CounterUniform24(seed, i), so the output depends only on seed and size.
class NoiseFiller : public FillStrategy {
 public:
  explicit NoiseFiller(std::uint64_t seed = 0) : seed_(seed) {}
  std::string name() const override { return "noise"; }
  std::map<std::string, std::string> params() const override;
  Image Fill(const Image& x, const PerturbMask& mask) const override;
  bool depends_on_mask() const override { return false; }

 private:
  std::uint64_t seed_;
};

// Gaussian blur of the whole image.
class BlurFiller : public FillStrategy {
 public:
  explicit BlurFiller(double sigma = 10.0);
  std::string name() const override { return "blur"; }
  std::map<std::string, std::string> params() const override;
  Image Fill(const Image& x, const PerturbMask& mask) const override;
  bool depends_on_mask() const override { return false; }
  double sigma() const { return sigma_; }

 private:
  double sigma_;
};

// Returns x itself: the "real image" reference row of filler comparisons.
class IdentityFiller : public FillStrategy {
 public:
  std::string name() const override { return "real"; }
  Image Fill(const Image& x, const PerturbMask& mask) const override;
};

enum class InpaintSchedule { kGaussSeidel, kJacobi };

struct InpaintOptions {
  int max_iterations = 2000;
  double tolerance = 1e-4;
  InpaintSchedule schedule = InpaintSchedule::kGaussSeidel;
};

struct InpaintStats {
  int iterations = 0;
  bool converged = false;
  std::vector<double> max_updates;  // per iteration
};

// Harmonic (Laplace) inpainting of the pixels where mask >= 0.5. Unmasked
// pixels are Dirichlet data; image borders are reflecting. The initial guess
// is a push-pull interpolation clamped to each hole's boundary range, and
// every relaxation step is a convex average, so the result obeys the
// discrete maximum principle exactly. Throws MethodError if every pixel is
// masked.
Image HarmonicInpaint(const Image& x, const PerturbMask& mask,
                      const InpaintOptions& options = {},
                      InpaintStats* stats = nullptr);

class HarmonicInpainter : public FillStrategy {
 public:
  explicit HarmonicInpainter(InpaintOptions options = {});
  std::string name() const override { return "inpaint"; }
  std::map<std::string, std::string> params() const override;
  Image Fill(const Image& x, const PerturbMask& mask) const override;

 private:
  InpaintOptions options_;
};

struct ExternalInpainterOptions {
  std::chrono::milliseconds timeout = std::chrono::seconds(60);
  // Tool's native square resolution; 0 sends the image at its own size.
  // Otherwise image and mask are bilinearly resized to it and back.
  int native_size = 0;
  // Concurrent tool invocations allowed.
  int max_parallel = 1;
};

// Runs '<command> <image.png> <mask.png> <out.png>' per fill. The mask PNG is
// 8-bit grayscale with 255 = inpaint, 0 = keep.
class ExternalInpainter : public FillStrategy {
 public:
  explicit ExternalInpainter(std::string command,
                             ExternalInpainterOptions options = {});
  std::string name() const override { return "inpaint-ext"; }
  std::map<std::string, std::string> params() const override;
  Image Fill(const Image& x, const PerturbMask& mask) const override;

 private:
  std::string command_;
  ExternalInpainterOptions options_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  mutable int running_ = 0;
};

// Mask PNG payload sent to external inpainters: 255 where mask >= 0.5.
std::vector<std::uint8_t> EncodeInpaintMask(const PerturbMask& mask);

// Memoizes another strategy keyed by content hashes of (image, mask).
class CachedFiller : public FillStrategy {
 public:
  explicit CachedFiller(std::shared_ptr<const FillStrategy> inner,
                        std::size_t capacity = 4096);
  std::string name() const override { return inner_->name(); }
  std::map<std::string, std::string> params() const override {
    return inner_->params();
  }
  Image Fill(const Image& x, const PerturbMask& mask) const override;
  bool depends_on_mask() const override { return inner_->depends_on_mask(); }
  std::size_t hits() const;
  std::size_t misses() const;

 private:
  struct KeyHash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const {
      return static_cast<std::size_t>(k.first ^ (k.second * 0x9E3779B97F4A7C15ULL));
    }
  };
  std::shared_ptr<const FillStrategy> inner_;
  std::size_t capacity_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, Image,
                             KeyHash>
      cache_;
  mutable std::size_t hits_ = 0;
  mutable std::size_t misses_ = 0;
};

// 64-bit content hash of a buffer of doubles (bit patterns).
std::uint64_t HashValues(std::span<const double> values);

}  // namespace attrib

#endif  // ATTRIB_FILLERS_H_
