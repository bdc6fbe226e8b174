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

#include "attrib/eval_metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "attrib/error.h"
#include "attrib/image_ops.h"
#include "attrib/log.h"
#include "attrib/parallel.h"
#include "attrib/similarity.h"

namespace attrib {

BoundingBox DeriveBox(const Field& map, double alpha) {
  if (map.empty()) throw ShapeError("derive_box: empty map");
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw ParameterError("derive_box: alpha must be in [0,1)");
  }
  const BoundingBox full = BoundingBox::Full(map.height(), map.width());
  const double top = map.max();
  if (!(top > 0.0)) return full;
  const double t = alpha * top;
  BoundingBox box{map.width(), map.height(), -1, -1};
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      if (map(r, c) < t) continue;
      box.x_min = std::min(box.x_min, c);
      box.y_min = std::min(box.y_min, r);
      box.x_max = std::max(box.x_max, c);
      box.y_max = std::max(box.y_max, r);
    }
  }
  return box.x_max < 0 ? full : box;
}

double Iou(const BoundingBox& a, const BoundingBox& b) {
  const long long ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min) + 1;
  const long long iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min) + 1;
  const long long inter = (ix > 0 && iy > 0) ? ix * iy : 0;
  const long long uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

LocalizationResult Localize(const Field& map, std::span<const BoundingBox> truth,
                            double alpha) {
  if (truth.empty()) throw ParameterError("localization: image has no box");
  LocalizationResult r;
  r.alpha = alpha;
  r.derived_box = DeriveBox(map, alpha);
  for (const BoundingBox& b : truth) r.iou = std::max(r.iou, Iou(r.derived_box, b));
  r.hit = r.iou >= 0.5;
  return r;
}

double LocalizationError(std::span<const LocalizationItem> items, double alpha) {
  if (items.empty()) throw ParameterError("localization: empty dataset");
  std::size_t misses = 0;
  for (const LocalizationItem& item : items) {
    if (!Localize(item.map, item.boxes, alpha).hit) ++misses;
  }
  return static_cast<double>(misses) / static_cast<double>(items.size());
}

std::vector<double> DefaultAlphaGrid() {
  std::vector<double> grid;
  for (int k = 0; k < 20; ++k) grid.push_back(k / 20.0);
  return grid;
}

AlphaSelection SelectAlpha(std::span<const LocalizationItem> items,
                           std::span<const double> grid) {
  if (grid.empty()) throw ParameterError("select_alpha: empty grid");
  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  AlphaSelection sel;
  sel.error = 2.0;
  for (double alpha : sorted) {
    const double e = LocalizationError(items, alpha);
    sel.errors.push_back(e);
    if (e < sel.error) {
      sel.error = e;
      sel.alpha = alpha;
    }
  }
  return sel;
}

double Trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("trapezoid: length mismatch");
  double area = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    area += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  }
  return area;
}

DeletionCurve DeletionMetric(const Image& x, const Field& map,
                             const ClassifierOracle& oracle, int target_class,
                             int step_pixels) {
  if (!x.same_spatial(map)) throw ShapeError("deletion: map/image size mismatch");
  if (step_pixels < 1) throw ParameterError("deletion: step must be >= 1");
  const std::size_t n = x.pixel_count();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return map[a] > map[b];
  });
  DeletionCurve curve;
  Image cur = x;
  curve.fractions.push_back(0.0);
  curve.probabilities.push_back(oracle.Score(cur, target_class));
  std::size_t removed = 0;
  while (removed < n) {
    const std::size_t next = std::min(n, removed + static_cast<std::size_t>(step_pixels));
    for (std::size_t k = removed; k < next; ++k) {
      for (int ch = 0; ch < 3; ++ch) cur[order[k] * 3 + ch] = 0.0;
    }
    removed = next;
    curve.fractions.push_back(static_cast<double>(removed) / static_cast<double>(n));
    curve.probabilities.push_back(oracle.Score(cur, target_class));
  }
  curve.auc = Trapezoid(curve.fractions, curve.probabilities);
  return curve;
}

SaliencyResult SaliencyMetric(const Image& x, const Field& map,
                              const ClassifierOracle& oracle, int target_class,
                              double alpha) {
  if (!x.same_spatial(map)) throw ShapeError("saliency: map/image size mismatch");
  SaliencyResult r;
  r.box = DeriveBox(map, alpha);
  const Image crop = BilinearResize(Crop(x, r.box), x.height(), x.width());
  r.area_fraction = static_cast<double>(r.box.area()) /
                    static_cast<double>(x.pixel_count());
  r.crop_score = oracle.Score(crop, target_class);
  r.value = std::log(std::max(r.area_fraction, 0.05)) -
            std::log(std::max(r.crop_score, 1e-12));
  return r;
}

std::vector<FillerRow> CompareFillers(
    std::span<const FillerItem> items, const ClassifierOracle& oracle,
    std::span<const std::shared_ptr<const FillStrategy>> fillers, int threads) {
  if (items.empty()) throw ParameterError("compare_fillers: empty dataset");
  for (const FillerItem& item : items) {
    if (item.object_mask.values().empty()) {
      throw ParameterError("compare_fillers: missing object mask");
    }
  }
  std::vector<FillerRow> rows;
  for (const auto& filler : fillers) {
    std::vector<std::uint8_t> correct(items.size());
    std::vector<double> sim(items.size());
    ParallelFor(items.size(), threads, [&](std::size_t i) {
      const Image xb = Perturb(items[i].image, items[i].object_mask, *filler);
      correct[i] = oracle.Top1(xb) == items[i].label;
      sim[i] = MsSsim(items[i].image, xb);
    });
    FillerRow row;
    row.filler = filler->name();
    row.count = items.size();
    row.accuracy = static_cast<double>(std::accumulate(correct.begin(), correct.end(), 0)) /
                   static_cast<double>(items.size());
    row.ms_ssim = std::accumulate(sim.begin(), sim.end(), 0.0) /
                  static_cast<double>(items.size());
    rows.push_back(row);
  }
  return rows;
}

double FullBlurConfidence(std::span<const LabeledInput> items,
                          const ClassifierOracle& oracle, double sigma,
                          int threads) {
  if (items.empty()) throw ParameterError("full_blur_confidence: no images");
  std::vector<double> p(items.size());
  ParallelFor(items.size(), threads, [&](std::size_t i) {
    p[i] = oracle.Score(GaussianBlur(items[i].image, sigma), items[i].label);
  });
  return std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
}

double OutsideBoxDrop(const Image& x, const BoundingBox& box,
                      const ClassifierOracle& oracle, const SpConfig& config) {
  box.Validate(x.height(), x.width());
  const SpResult sp = SlidingPatch(x, oracle, config);
  double sum = 0.0;
  std::size_t count = 0;
  for (int r = 0; r < sp.coarse.height(); ++r) {
    for (int c = 0; c < sp.coarse.width(); ++c) {
      const int top = r * config.stride, left = c * config.stride;
      const bool overlaps = top <= box.y_max && top + config.patch - 1 >= box.y_min &&
                            left <= box.x_max && left + config.patch - 1 >= box.x_min;
      if (overlaps) continue;
      sum += std::abs(sp.coarse(r, c));
      ++count;
    }
  }
  if (count == 0) {
    Warn("outside_box_drop: no patch position lies outside the box; defined as 0");
    return 0.0;
  }
  return sum / static_cast<double>(count);
}

std::vector<std::pair<int, std::size_t>> LabelHistogram(
    std::span<const Image> samples, const ClassifierOracle& oracle, int threads) {
  std::vector<int> top(samples.size());
  ParallelFor(samples.size(), threads,
              [&](std::size_t i) { top[i] = oracle.Top1(samples[i]); });
  std::map<int, std::size_t> counts;
  for (int t : top) ++counts[t];
  std::vector<std::pair<int, std::size_t>> out(counts.begin(), counts.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  return out;
}

}  // namespace attrib
