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

// Acceptance suite: one PASS/FAIL line per criterion, each with a pinned
// tolerance and a wall-clock budget. Exit status is the number of failures
// that were not declared with --known-failure <id>. --only <id> runs a
// single criterion.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "attrib/dataset.h"
#include "attrib/error.h"
#include "attrib/eval_metrics.h"
#include "attrib/fillers.h"
#include "attrib/image_ops.h"
#include "attrib/lime.h"
#include "attrib/mask_opt.h"
#include "attrib/random.h"
#include "attrib/sensitivity.h"
#include "attrib/similarity.h"
#include "attrib/sliding_patch.h"
#include "attrib/subprocess.h"
#include "attrib/superpixel.h"
#include "attrib/tiny_cnn.h"
#include "cli.h"
#include "test_util.h"

namespace attrib {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Collects the individual checks of one criterion.
class Checks {
 public:
  void Expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void Note(const std::string& what) { notes_.push_back(what); }
  bool ok() const { return failures_.empty(); }
  std::string Summary() const {
    std::string s;
    for (const std::string& t : failures_) s += (s.empty() ? "" : "; ") + t;
    for (const std::string& t : notes_) s += (s.empty() ? "" : "; ") + t;
    return s;
  }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

std::string F(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Relative error with a floor on the denominator for near-zero gradients.
double RelErr(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Central difference that is rejected when halving the step changes it,
// which flags a ReLU kink inside the stencil.
bool StableCentralDiff(const std::function<double(double)>& f, double h,
                       double* out) {
  const double d1 = (f(h) - f(-h)) / (2 * h);
  const double d2 = (f(h / 2) - f(-h / 2)) / h;
  *out = d1;
  return RelErr(d1, d2, 1e-7) < 1e-6;
}

std::vector<std::size_t> SampleIndices(std::size_t n, std::size_t k,
                                       std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  rng.Shuffle(std::span<std::size_t>(idx));
  idx.resize(std::min(n, k));
  return idx;
}

// --- 1 ----------------------------------------------------------------------

void Geometry(Checks& c) {
  c.Expect(SpPositions(224, 29, 3) == 66, "SpPositions(224, 29, 3) != 66");
  const Image x = testing::RandomImage(224, 224, 1);
  const RegionMeanOracle oracle({80, 80, 135, 135});
  SpConfig cfg;
  cfg.target_class = 1;
  c.Expect(cfg.patch == 29 && cfg.stride == 3, "SP defaults are not 29/3");
  const SpResult r = SlidingPatch(x, oracle, cfg);
  c.Expect(r.coarse.height() == 66 && r.coarse.width() == 66,
           "coarse map is " + std::to_string(r.coarse.height()) + "x" +
               std::to_string(r.coarse.width()));
  c.Expect(r.map.height() == 224 && r.map.width() == 224, "map is not 224x224");
  c.Note("coarse " + std::to_string(r.coarse.height()) + "x" +
         std::to_string(r.coarse.width()));
}

// --- 2 ----------------------------------------------------------------------

TinyCnn GradModel() {
  TinyCnnSpec spec;
  spec.input_height = 32;
  spec.input_width = 32;
  spec.num_classes = 3;
  return TinyCnn::Initialize(spec, 21);
}

void GradientFidelity(Checks& c) {
  constexpr double kTol = 1e-4;
  constexpr std::size_t kCoords = 100;
  const TinyCnn model = GradModel();
  const Image x = testing::RandomImage(32, 32, 22);

  // Input gradients.
  {
    const Image g = model.InputGradient(x, 1);
    double worst = 0.0;
    std::size_t used = 0, skipped = 0;
    for (std::size_t i : SampleIndices(x.size(), x.size(), 23)) {
      if (used == kCoords) break;
      double fd = 0.0;
      const bool stable = StableCentralDiff(
          [&](double h) {
            Image y = x;
            y[i] += h;
            return model.Score(y, 1);
          },
          1e-5, &fd);
      if (!stable) {
        ++skipped;
        continue;
      }
      worst = std::max(worst, RelErr(g[i], fd));
      ++used;
    }
    c.Expect(used == kCoords, "input gradient: too few smooth coordinates");
    c.Expect(worst < kTol, "input gradient rel err " + F(worst));
    c.Note("input " + F(worst, 2) + " (" + std::to_string(used) + " coords)");
  }

  const Field coarse = testing::RandomField(12, 12, 24, 0.2, 0.8);

  // MP objective gradient on a fixed jitter batch.
  {
    MpConfig cfg;
    cfg.mask_size = 12;
    cfg.target_class = 1;
    cfg.blur_sigma = 3.0;
    const Image blurred = GaussianBlur(x, cfg.blur_sigma);
    const std::vector<JitterShift> batch = {
        {0, JitterDirection::kHorizontal}, {2, JitterDirection::kVertical}};
    Field g;
    MpEvaluate(x, blurred, model, cfg, coarse, batch, &g);
    double worst = 0.0;
    std::size_t used = 0;
    for (std::size_t i : SampleIndices(coarse.size(), kCoords, 25)) {
      double fd = 0.0;
      const bool stable = StableCentralDiff(
          [&](double h) {
            Field m = coarse;
            m[i] += h;
            return MpEvaluate(x, blurred, model, cfg, m, batch, nullptr).total;
          },
          1e-6, &fd);
      if (!stable) continue;
      worst = std::max(worst, RelErr(g[i], fd));
      ++used;
    }
    c.Expect(used >= kCoords * 95 / 100, "mp: too few smooth coordinates");
    c.Expect(worst < kTol, "mp mask gradient rel err " + F(worst));
    c.Note("mp " + F(worst, 2) + " (" + std::to_string(used) + ")");
  }

  // MP2 mask gradient, blur and inpainting fillers.
  const BlurFiller blur(3.0);
  const HarmonicInpainter inpaint;
  for (const FillStrategy* filler : {static_cast<const FillStrategy*>(&blur),
                                     static_cast<const FillStrategy*>(&inpaint)}) {
    const Field g = Mp2MaskGradient(x, coarse, model, *filler, 1);
    double worst = 0.0;
    std::size_t used = 0;
    for (std::size_t i : SampleIndices(coarse.size(), kCoords, 26)) {
      double fd = 0.0;
      const bool stable = StableCentralDiff(
          [&](double h) {
            Field m = coarse;
            m[i] += h;
            return model.Score(Mp2Perturbed(x, m, *filler), 1);
          },
          1e-6, &fd);
      if (!stable) continue;
      worst = std::max(worst, RelErr(g[i], fd));
      ++used;
    }
    const std::string tag = "mp2/" + filler->name();
    c.Expect(used >= kCoords * 95 / 100, tag + ": too few smooth coordinates");
    c.Expect(worst < kTol, tag + " mask gradient rel err " + F(worst));
    c.Note(tag + " " + F(worst, 2) + " (" + std::to_string(used) + ")");
  }
}

// --- 3 ----------------------------------------------------------------------

void BruteForce(Checks& c) {
  const TinyCnn model = GradModel();
  const Image x = testing::RandomImage(32, 32, 31);
  SpConfig cfg;
  cfg.patch = 8;
  cfg.stride = 4;
  cfg.target_class = 2;
  const SpResult r = SlidingPatch(x, model, cfg);
  const GrayFiller gray;
  const int n = (32 - 8) / 4 + 1;
  Field coarse(n, n);
  const double base = model.Score(x, 2);
  for (int pr = 0; pr < n; ++pr) {
    for (int pc = 0; pc < n; ++pc) {
      Image y = x;
      for (int rr = pr * 4; rr < pr * 4 + 8; ++rr) {
        for (int cc = pc * 4; cc < pc * 4 + 8; ++cc) {
          for (int ch = 0; ch < 3; ++ch) y(rr, cc, ch) = gray.color()[ch];
        }
      }
      coarse(pr, pc) = base - model.Score(y, 2);
    }
  }
  double worst = 0.0;
  c.Expect(r.coarse.height() == n && r.coarse.width() == n, "sp coarse shape");
  if (r.coarse.same_shape(coarse)) {
    for (std::size_t i = 0; i < coarse.size(); ++i) {
      worst = std::max(worst, std::abs(r.coarse[i] - coarse[i]));
    }
    const Field up = BilinearResize(coarse, 32, 32);
    for (std::size_t i = 0; i < up.size(); ++i) {
      worst = std::max(worst, std::abs(r.map.values()[i] - up[i]));
    }
  }
  c.Expect(worst < 1e-9, "sp vs loop max abs diff " + F(worst));
  c.Note("sp " + F(worst, 2));

  // Deletion on 8x8 against a hand-rolled trapezoid.
  TinyCnnSpec spec;
  spec.input_height = 8;
  spec.input_width = 8;
  spec.num_classes = 2;
  spec.conv_channels = {4};
  const TinyCnn small = TinyCnn::Initialize(spec, 32);
  const Image z = testing::RandomImage(8, 8, 33);
  const Field map = testing::RandomField(8, 8, 34);
  constexpr int kStep = 5;
  const DeletionCurve curve = DeletionMetric(z, map, small, 0, kStep);
  std::vector<int> order(64);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return map[a] > map[b]; });
  Image cur = z;
  double prev_f = 0.0, prev_p = small.Score(cur, 0), area = 0.0;
  for (int k = 0; k < 64;) {
    for (int j = 0; j < kStep && k < 64; ++j, ++k) {
      for (int ch = 0; ch < 3; ++ch) cur(order[k] / 8, order[k] % 8, ch) = 0.0;
    }
    const double f = k / 64.0, p = small.Score(cur, 0);
    area += 0.5 * (f - prev_f) * (p + prev_p);
    prev_f = f;
    prev_p = p;
  }
  const double diff = std::abs(curve.auc - area);
  c.Expect(diff < 1e-9, "deletion auc diff " + F(diff));
  c.Note("deletion " + F(diff, 2));
}

// --- 4 ----------------------------------------------------------------------

// Score = 0.5 + sum of planted weights of the segments left intact.
class PlantedPresenceOracle : public ClassifierOracle {
 public:
  PlantedPresenceOracle(Image reference, Segmentation seg,
                        std::vector<double> weights)
      : ref_(std::move(reference)), seg_(std::move(seg)), w_(std::move(weights)) {}
  int num_classes() const override { return 2; }

 protected:
  std::vector<double> DoScoreAll(const Image& x) const override {
    double s = 0.5;
    for (int k = 0; k < seg_.count(); ++k) {
      const std::size_t p = seg_.pixels(k).front();
      if (x[p * 3] == ref_[p * 3]) s += w_[k];
    }
    return {1.0 - s, s};
  }

 private:
  Image ref_;
  Segmentation seg_;
  std::vector<double> w_;
};

void LimeRecovery(Checks& c) {
  const Image x = testing::RandomImage(32, 32, 41);
  std::vector<int> labels(32 * 32);
  for (int r = 0; r < 32; ++r) {
    for (int col = 0; col < 32; ++col) labels[r * 32 + col] = (r / 8) * 4 + col / 8;
  }
  const Segmentation seg(32, 32, labels);
  const int s = seg.count();
  std::vector<double> plant(s);
  Rng rng(42);
  for (double& w : plant) w = (rng.Uniform() - 0.5) * 0.04;
  const PlantedPresenceOracle oracle(x, seg, plant);

  LimeConfig cfg;
  cfg.num_samples = 4 * s;
  cfg.lasso_lambda = 0.0;
  cfg.fit_steps = 20000;
  cfg.target_class = 1;
  const LimeResult r = LimeFit(x, seg, oracle, cfg);

  double plant_err = 0.0;
  for (int k = 0; k < s; ++k) {
    plant_err = std::max(plant_err, std::abs(r.fit.coefficients[k] - plant[k]));
  }
  c.Expect(plant_err < 1e-3, "plant max abs err " + F(plant_err));

  // Weighted normal equations with an intercept column.
  const int n = static_cast<int>(r.samples.size());
  Eigen::MatrixXd a(n, s + 1);
  Eigen::VectorXd y(n), w(n);
  for (int i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    for (int k = 0; k < s; ++k) a(i, k + 1) = r.samples[i].presence[k];
    y(i) = r.samples[i].score;
    w(i) = r.samples[i].weight;
  }
  const Eigen::MatrixXd atw = a.transpose() * w.asDiagonal();
  const Eigen::VectorXd beta = (atw * a).ldlt().solve(atw * y);
  double ne_err = std::abs(r.fit.intercept - beta(0));
  for (int k = 0; k < s; ++k) {
    ne_err = std::max(ne_err, std::abs(r.fit.coefficients[k] - beta(k + 1)));
  }
  c.Expect(ne_err < 1e-6, "normal equations max abs diff " + F(ne_err));
  c.Note("S=" + std::to_string(s) + " N=" + std::to_string(n) + " plant " +
         F(plant_err, 2) + " normal-eq " + F(ne_err, 2));
}

// --- 5 ----------------------------------------------------------------------

void Mp2Contract(Checks& c) {
  c.Expect(Mp2Config().stop_prob == 0.001, "default stop_prob is not 0.001");
  c.Expect(Mp2Config().pixels_per_step == 2, "default growth is not 2");
  const BoundingBox box{80, 80, 135, 135};
  const Image x = testing::BrightBox(224, 224, box, 0.1, 0.9);
  const RegionMeanOracle oracle(box);
  // Coarse footprint: cells whose upsampled support reaches into the box.
  // With half-pixel bilinear upsampling that is the 7x7 block over the box
  // plus the ring of cells whose centres lie within one cell of its edge.
  std::vector<bool> footprint(28 * 28, false);
  for (int cell = 0; cell < 28 * 28; ++cell) {
    Field one(28, 28, 0.0);
    one[cell] = 1.0;
    const Field up = BilinearResize(one, 224, 224);
    for (int r = box.y_min; r <= box.y_max && !footprint[cell]; ++r) {
      for (int col = box.x_min; col <= box.x_max; ++col) {
        if (up(r, col) > 0.0) {
          footprint[cell] = true;
          break;
        }
      }
    }
  }
  auto in_footprint = [&](int cell) { return footprint[cell]; };
  c.Note("footprint " +
         std::to_string(std::count(footprint.begin(), footprint.end(), true)) +
         " cells");

  struct Run {
    std::string name;
    std::shared_ptr<const FillStrategy> filler;
    double stop_prob;
    int max_steps;
    bool expect_stop;
  };
  const auto black = std::make_shared<GrayFiller>(std::array<double, 3>{0, 0, 0});
  const std::vector<Run> runs = {
      {"black/0.001", black, 0.001, 0, true},
      {"black/0.003", black, 0.003, 0, true},
      {"blur", std::make_shared<BlurFiller>(10.0), 0.001, 40, false},
  };
  for (const Run& run : runs) {
    Mp2Config cfg;
    cfg.target_class = 1;
    cfg.filler = run.filler;
    cfg.stop_prob = run.stop_prob;
    cfg.max_steps = run.max_steps;
    const Mp2Result r = Mp2Attribute(x, oracle, cfg);
    bool growth = r.trace.size() == static_cast<std::size_t>(r.iterations) + 1;
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
      growth = growth && r.trace[i].ones == 2 * i &&
               r.trace[i].iteration == static_cast<int>(i);
    }
    c.Expect(growth, run.name + ": ones-count does not grow by 2 per iteration");
    if (run.expect_stop) {
      c.Expect(r.converged, run.name + ": did not stop");
      bool first = !r.trace.empty() && r.trace.back().probability <= run.stop_prob;
      for (std::size_t i = 0; i + 1 < r.trace.size(); ++i) {
        first = first && r.trace[i].probability > run.stop_prob;
      }
      c.Expect(first, run.name + ": stop is not the first sub-threshold iteration");
    }
    const double inside =
        r.selected.empty()
            ? 0.0
            : static_cast<double>(std::count_if(r.selected.begin(),
                                                r.selected.end(), in_footprint)) /
                  static_cast<double>(r.selected.size());
    c.Expect(inside >= 0.9, run.name + ": inside fraction " + F(inside));
    c.Note(run.name + " it " + std::to_string(r.iterations) + " inside " +
           F(inside, 3));
  }
}

// --- 6 ----------------------------------------------------------------------

void MetricIdentities(Checks& c) {
  const BoundingBox a{0, 0, 9, 9}, b{5, 0, 14, 9}, d{20, 20, 25, 25};
  c.Expect(Iou(a, a) == 1.0, "IoU(identical) != 1");
  c.Expect(Iou(a, d) == 0.0, "IoU(disjoint) != 0");
  c.Expect(Iou(a, b) == 1.0 / 3.0, "IoU(a, b) = " + F(Iou(a, b), 17));

  // A 2x2 box on 16x16 covers 1.6% of the image: the 0.05 floor applies.
  const Image x = testing::RandomImage(16, 16, 61);
  const RegionMeanOracle oracle(BoundingBox{0, 0, 15, 15});
  Field map(16, 16, 0.0);
  for (int r = 6; r < 8; ++r) {
    for (int col = 6; col < 8; ++col) map(r, col) = 1.0;
  }
  const SaliencyResult sal = SaliencyMetric(x, map, oracle, 1, 0.5);
  c.Expect(sal.area_fraction < 0.05, "saliency box not below the floor");
  c.Expect(std::abs(sal.value - (std::log(0.05) - std::log(sal.crop_score))) < 1e-12,
           "saliency clamp inactive");

  const Field f = testing::RandomField(20, 20, 62);
  c.Expect(std::abs(Ssim(f, f) - 1.0) < 1e-12, "SSIM(x, x) != 1");
  c.Expect(std::abs(HeatmapSsim(f, f) - 1.0) < 1e-12, "heatmap SSIM(x, x) != 1");
  const Image big = testing::RandomImage(128, 128, 63);
  c.Expect(std::abs(MsSsim(big, big) - 1.0) < 1e-12, "MS-SSIM(x, x) != 1");
  c.Expect(std::abs(Spearman(f, f) - 1.0) < 1e-12, "Spearman(x, x) != 1");

  SweepSpec spec;
  spec.method = SweepMethod::kSp;
  spec.axis = SweepAxis::kPatchSizes;
  spec.values = {3, 5, 7, 9, 11};
  spec.sp.stride = 4;
  spec.sp.target_class = 1;
  const std::vector<SweepItem> items = {{testing::RandomImage(24, 24, 64), 1}};
  const SweepResult sweep =
      RunSweep(items, spec, oracle, std::make_shared<GrayFiller>());
  c.Expect(sweep.pairs_per_image == 10,
           "k=5 pair count " + std::to_string(sweep.pairs_per_image));
  c.Note("IoU 1/3, clamp, self-similarity, 10 pairs");
}

// --- 7 ----------------------------------------------------------------------

int RunCli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::RunCli(args, out, err);
  if (code != cli::kExitOk) {
    std::fprintf(stderr, "attrib %s failed (%d): %s\n", args[0].c_str(), code,
                 err.str().c_str());
  }
  return code;
}

struct Set {
  std::vector<Image> images;
  std::vector<Annotation> entries;
};

Set LoadSet(const fs::path& dir) {
  const Dataset ds = Dataset::Load(dir);
  Set s;
  s.entries = ds.entries();
  for (std::size_t i = 0; i < ds.size(); ++i) s.images.push_back(ds.LoadImage(i));
  return s;
}

Field RandomMap(int h, int w, std::uint64_t seed) {
  return testing::RandomField(h, w, 7000 + seed);
}

// Fixture-scale method settings. SP patch/stride and LIME's sample count are
// shrunk to the 64 px images and the time budget; MP2 stops at chance level
// (1 / classes), the analog of 0.001 for 1000 classes.
struct Method {
  std::string name;
  std::function<Field(const Image&, int)> run;
};

std::vector<Method> FixtureMethods(const ClassifierOracle& model) {
  auto gray = std::make_shared<GrayFiller>();
  auto inpaint = std::make_shared<HarmonicInpainter>();
  auto blur = std::make_shared<BlurFiller>(10.0);
  const double chance = 1.0 / model.num_classes();
  auto sp = [&model](std::shared_ptr<const FillStrategy> f) {
    return [&model, f](const Image& x, int target) {
      SpConfig cfg;
      cfg.patch = 9;
      cfg.stride = 5;
      cfg.filler = f;
      cfg.target_class = target;
      return SpAttribute(x, model, cfg).values();
    };
  };
  auto lime = [&model](std::shared_ptr<const FillStrategy> f) {
    return [&model, f](const Image& x, int target) {
      LimeConfig cfg;
      cfg.num_samples = 100;
      cfg.filler = f;
      cfg.target_class = target;
      return LimeAttribute(x, model, cfg).map.values();
    };
  };
  auto mp2 = [&model, chance](std::shared_ptr<const FillStrategy> f) {
    return [&model, f, chance](const Image& x, int target) {
      Mp2Config cfg;
      cfg.stop_prob = chance;
      cfg.filler = f;
      cfg.target_class = target;
      return Mp2Attribute(x, model, cfg).map.values();
    };
  };
  return {{"SP", sp(gray)},     {"SP-G", sp(inpaint)},    {"LIME", lime(gray)},
          {"LIME-G", lime(inpaint)}, {"MP2", mp2(blur)}, {"MP2-G", mp2(inpaint)}};
}

void FixtureAnalogs(Checks& c, const fs::path& work) {
  const fs::path root = work / "fixture";
  if (RunCli({"fixtures", "--out", root.string()}) != cli::kExitOk) {
    c.Expect(false, "fixtures command failed");
    return;
  }
  const TinyCnn model = LoadModel(root / "model.tcnn");
  const Set eval = LoadSet(root / "eval");
  const Set held = LoadSet(root / "heldout");
  c.Note(std::to_string(eval.images.size()) + " images");
  const std::vector<double> grid = DefaultAlphaGrid();
  const int step = 2 * eval.images.front().width();

  // (a) localization error and deletion AUC versus random maps.
  std::vector<Method> methods = FixtureMethods(model);
  methods.push_back({"random", [](const Image& x, int i) {
                       return RandomMap(x.height(), x.width(), i);
                     }});
  std::map<std::string, std::pair<double, double>> scores;
  for (const Method& m : methods) {
    const bool random = m.name == "random";
    auto items_for = [&](const Set& s, std::uint64_t offset, double* deletion) {
      std::vector<LocalizationItem> items;
      double del = 0.0;
      for (std::size_t i = 0; i < s.images.size(); ++i) {
        const int target = s.entries[i].class_id;
        Field map = m.run(s.images[i], random ? static_cast<int>(offset + i) : target);
        if (deletion) del += DeletionMetric(s.images[i], map, model, target, step).auc;
        items.push_back({std::move(map), s.entries[i].boxes});
      }
      if (deletion) *deletion = del / static_cast<double>(s.images.size());
      return items;
    };
    const std::vector<LocalizationItem> held_items = items_for(held, 100000, nullptr);
    const double alpha = SelectAlpha(held_items, grid).alpha;
    double deletion = 0.0;
    const std::vector<LocalizationItem> eval_items = items_for(eval, 0, &deletion);
    scores[m.name] = {LocalizationError(eval_items, alpha), deletion};
  }
  const auto [rand_loc, rand_del] = scores["random"];
  std::string table = "loc/del random " + F(rand_loc, 3) + "/" + F(rand_del, 3);
  for (const auto& [name, s] : scores) {
    if (name == "random") continue;
    c.Expect(s.first < rand_loc, "(a) " + name + " localization " + F(s.first, 3) +
                                     " !< random " + F(rand_loc, 3));
    c.Expect(s.second < rand_del, "(a) " + name + " deletion " + F(s.second, 3) +
                                      " !< random " + F(rand_del, 3));
    table += ", " + name + " " + F(s.first, 3) + "/" + F(s.second, 3);
  }
  c.Note("(a) " + table);

  // (b) sweep SSIM, G-variant versus plain, on the first images.
  constexpr std::size_t kSweepImages = 10;
  std::vector<SweepItem> sweep_items;
  for (std::size_t i = 0; i < std::min(kSweepImages, eval.images.size()); ++i) {
    sweep_items.push_back({eval.images[i], eval.entries[i].class_id});
  }
  std::string sweep_note;
  const auto inpaint = std::make_shared<CachedFiller>(std::make_shared<HarmonicInpainter>());
  for (SweepMethod method : {SweepMethod::kSp, SweepMethod::kLime, SweepMethod::kMp2}) {
    SweepSpec spec;
    spec.method = method;
    spec.axis = AxisFor(method);
    std::shared_ptr<const FillStrategy> plain = std::make_shared<GrayFiller>();
    if (method == SweepMethod::kSp) {
      spec.values = {5, 9, 13, 17, 21};
      spec.sp.stride = 5;
    } else if (method == SweepMethod::kLime) {
      spec.values = DefaultAxisValues(spec.axis);
      spec.lime.num_samples = 100;
    } else {
      spec.values = {8, 16, 32};
      spec.mp2.stop_prob = 1.0 / model.num_classes();
      plain = std::make_shared<BlurFiller>(10.0);
    }
    const SweepResult base = RunSweep(sweep_items, spec, model, plain);
    const SweepResult gen = RunSweep(sweep_items, spec, model, inpaint);
    c.Expect(gen.mean[0] >= base.mean[0], "(b) " + gen.method + " SSIM " +
                                              F(gen.mean[0], 3) + " < " +
                                              base.method + " " + F(base.mean[0], 3));
    sweep_note += (sweep_note.empty() ? "" : ", ") + base.method + " " +
                  F(base.mean[0], 3) + " vs " + F(gen.mean[0], 3);
  }
  c.Note("(b) SSIM " + sweep_note);

  // (c) mean |drop| of patches that miss the object box.
  constexpr std::size_t kDropImages = 50;
  double drop_sp = 0.0, drop_spg = 0.0;
  const std::size_t nd = std::min(kDropImages, eval.images.size());
  for (std::size_t i = 0; i < nd; ++i) {
    SpConfig cfg;
    cfg.patch = 9;
    cfg.stride = 5;
    cfg.target_class = eval.entries[i].class_id;
    const BoundingBox& box = eval.entries[i].boxes.front();
    drop_sp += OutsideBoxDrop(eval.images[i], box, model, cfg);
    cfg.filler = std::make_shared<HarmonicInpainter>();
    drop_spg += OutsideBoxDrop(eval.images[i], box, model, cfg);
  }
  drop_sp /= static_cast<double>(nd);
  drop_spg /= static_cast<double>(nd);
  c.Expect(drop_spg <= drop_sp,
           "(c) SP-G drop " + F(drop_spg, 3) + " > SP " + F(drop_sp, 3));
  c.Note("(c) drop SP " + F(drop_sp, 3) + " SP-G " + F(drop_spg, 3));
}

// --- 8 ----------------------------------------------------------------------

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Relative path -> bytes of every regular file under dir.
std::map<std::string, std::string> Tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      files[fs::relative(e.path(), dir).string()] = Slurp(e.path());
    }
  }
  return files;
}

void CliDeterminism(Checks& c, const fs::path& work) {
  const fs::path fx = work / "det_fixture";
  const std::vector<std::string> fixtures = {
      "fixtures", "--size", "32", "--count", "6", "--heldout", "4",
      "--train-per-class", "8", "--epochs", "3", "--seed", "5"};
  const fs::path model = fx / "t1" / "model.tcnn";
  const std::string eval = (fx / "t1" / "eval").string();
  const std::string held = (fx / "t1" / "heldout").string();
  const fs::path conf = work / "det_config.json";
  std::ofstream(conf) << R"({"seed": 3, "filler": "gray"})";

  struct Command {
    std::string name;
    std::vector<std::string> args;
  };
  const std::vector<std::string> m = {"--model", model.string()};
  auto with = [&](std::vector<std::string> a, bool add_model = true) {
    if (add_model) a.insert(a.end(), m.begin(), m.end());
    return a;
  };
  const std::vector<Command> commands = {
      {"fixtures", fixtures},
      {"attribute sp",
       with({"attribute", "--dataset", eval, "--method", "sp", "--patch", "9",
             "--stride", "4", "--filler", "inpaint", "--dump-positions"})},
      {"attribute lime",
       with({"attribute", "--dataset", eval, "--method", "lime", "--samples", "60",
             "--segments", "12", "--config", conf.string(), "--dump-samples"})},
      {"attribute mp",
       with({"attribute", "--dataset", eval, "--method", "mp", "--mask-size", "8",
             "--steps", "5", "--blur-sigma", "3"})},
      {"attribute mp2",
       with({"attribute", "--dataset", eval, "--method", "mp2", "--mask-size", "8",
             "--stop-prob", "0.3", "--filler", "inpaint"})},
      {"attribute fido",
       with({"attribute", "--dataset", eval, "--method", "fido", "--mask-size", "8",
             "--steps", "5"})},
      {"evaluate localization",
       with({"evaluate", "localization", "--dataset", eval, "--heldout", held,
             "--select-alpha", "--method", "lime", "--samples", "40", "--segments",
             "12", "--filler", "noise"})},
      {"evaluate deletion",
       with({"evaluate", "deletion", "--dataset", eval, "--method", "sp", "--patch",
             "9", "--stride", "4"})},
      {"evaluate saliency",
       with({"evaluate", "saliency", "--dataset", eval, "--method", "random"})},
      {"evaluate compare-fillers",
       with({"evaluate", "compare-fillers", "--dataset", eval})},
      {"sensitivity patch-sizes",
       with({"sensitivity", "--axis", "patch-sizes", "--dataset", eval, "--values",
             "5,9,13", "--stride", "4"})},
      {"sensitivity random-seeds",
       with({"sensitivity", "--axis", "random-seeds", "--dataset", eval, "--values",
             "1,2,3", "--samples", "40", "--segments", "12"})},
      {"sensitivity mask-sizes",
       with({"sensitivity", "--axis", "mask-sizes", "--dataset", eval, "--values",
             "4,8", "--stop-prob", "0.3", "--max-steps", "6"})},
  };

  std::size_t checked_files = 0;
  for (std::size_t k = 0; k < commands.size(); ++k) {
    const Command& cmd = commands[k];
    std::map<std::string, std::string> first;
    bool ran = true;
    for (const char* threads : {"1", "3"}) {
      const fs::path out =
          k == 0 ? fx / ("t" + std::string(threads))
                 : work / "det" / (std::to_string(k) + "_t" + threads);
      std::vector<std::string> args = cmd.args;
      args.insert(args.end(), {"--threads", threads, "--out", out.string()});
      if (RunCli(args) != cli::kExitOk) {
        c.Expect(false, cmd.name + " failed with --threads " + threads);
        ran = false;
        break;
      }
      if (first.empty()) {
        first = Tree(out);
      } else {
        const auto second = Tree(out);
        c.Expect(first == second, cmd.name + ": outputs differ across --threads");
        bool has_data = false;
        for (const auto& [name, bytes] : first) {
          has_data = has_data || name.ends_with(".hmap") || name.ends_with(".csv");
        }
        c.Expect(has_data, cmd.name + ": no HMAP/CSV output");
        checked_files += first.size();
      }
    }
    if (!ran) continue;
  }
  c.Note(std::to_string(commands.size()) + " commands, " +
         std::to_string(checked_files) + " files byte-identical");
}

// --- 9 ----------------------------------------------------------------------

PerturbMask RandomMask(int h, int w, Rng& rng) {
  Field m(h, w, 0.0);
  const int rects = 1 + static_cast<int>(rng.Below(3));
  for (int k = 0; k < rects; ++k) {
    const int top = static_cast<int>(rng.Below(h)), left = static_cast<int>(rng.Below(w));
    const int bh = 1 + static_cast<int>(rng.Below(h / 2)),
              bw = 1 + static_cast<int>(rng.Below(w / 2));
    for (int r = top; r < std::min(h, top + bh); ++r) {
      for (int col = left; col < std::min(w, left + bw); ++col) m(r, col) = 1.0;
    }
  }
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (rng.Uniform() < 0.05) m[i] = 1.0;
  }
  return PerturbMask(m, MaskKind::kBinary);
}

void FillerContract(Checks& c) {
  const std::vector<std::shared_ptr<const FillStrategy>> fillers = {
      std::make_shared<GrayFiller>(), std::make_shared<NoiseFiller>(9),
      std::make_shared<BlurFiller>(3.0), std::make_shared<HarmonicInpainter>(),
      std::make_shared<ExternalInpainter>(testing::FakeTool("inpaint-gray"))};
  Rng rng(91);
  for (const auto& filler : fillers) {
    const int instances = filler->name() == "inpaint-ext" ? 10 : 50;
    bool exact = true;
    for (int k = 0; k < instances; ++k) {
      const int h = 8 + static_cast<int>(rng.Below(17)), w = 8 + static_cast<int>(rng.Below(17));
      const Image x = testing::RandomImage(h, w, 900 + k);
      const PerturbMask mask = RandomMask(h, w, rng);
      const Image y = Perturb(x, mask, *filler);
      for (int r = 0; r < h; ++r) {
        for (int col = 0; col < w; ++col) {
          if (mask(r, col) != 0.0) continue;
          for (int ch = 0; ch < 3; ++ch) exact = exact && y(r, col, ch) == x(r, col, ch);
        }
      }
    }
    c.Expect(exact, filler->name() + " altered unmasked pixels");
  }

  int violations = 0;
  for (int k = 0; k < 100; ++k) {
    const int h = 6 + static_cast<int>(rng.Below(27)), w = 6 + static_cast<int>(rng.Below(27));
    const Image x = testing::RandomImage(h, w, 2000 + k);
    PerturbMask mask = RandomMask(h, w, rng);
    if (mask.CountOnes() == static_cast<std::size_t>(h * w)) {
      Field v = mask.values();
      v(0, 0) = 0.0;
      mask = PerturbMask(v, MaskKind::kBinary);
    }
    const Image f = HarmonicInpaint(x, mask);
    for (int ch = 0; ch < 3; ++ch) {
      double lo = 1e300, hi = -1e300;
      for (int r = 0; r < h; ++r) {
        for (int col = 0; col < w; ++col) {
          if (mask(r, col) >= 0.5) continue;
          lo = std::min(lo, x(r, col, ch));
          hi = std::max(hi, x(r, col, ch));
        }
      }
      for (int r = 0; r < h; ++r) {
        for (int col = 0; col < w; ++col) {
          if (mask(r, col) < 0.5) continue;
          if (f(r, col, ch) < lo || f(r, col, ch) > hi) ++violations;
        }
      }
    }
  }
  c.Expect(violations == 0,
           "maximum principle violated at " + std::to_string(violations) + " values");
  c.Note("5 fillers bit-exact, 100 inpaint instances within bounds");
}

// ---------------------------------------------------------------------------

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<void(Checks&)> run;
};

int Main(const std::vector<int>& known_failures, int only) {
  TempDir work("acceptance");
  const std::vector<Criterion> criteria = {
      {1, "geometry", 1.0, Geometry},
      {2, "gradient fidelity", 30.0, GradientFidelity},
      {3, "brute-force equivalence", 10.0, BruteForce},
      {4, "lime recovery", 30.0, LimeRecovery},
      {5, "mp2 contract", 60.0, Mp2Contract},
      {6, "metric identities", 5.0, MetricIdentities},
      {7, "fixture analogs", 600.0,
       [&](Checks& c) { FixtureAnalogs(c, work.path()); }},
      {8, "cli determinism", 120.0,
       [&](Checks& c) { CliDeterminism(c, work.path()); }},
      {9, "filler contract", 30.0, FillerContract},
  };
  int failures = 0;
  for (const Criterion& cr : criteria) {
    if (only > 0 && cr.id != only) continue;
    Checks checks;
    const auto t0 = Clock::now();
    try {
      cr.run(checks);
    } catch (const std::exception& e) {
      checks.Expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    checks.Expect(secs <= cr.budget_s, "over budget");
    const bool pass = checks.ok();
    const bool known = std::find(known_failures.begin(), known_failures.end(),
                                 cr.id) != known_failures.end();
    failures += pass || known ? 0 : 1;
    std::printf("%s %d %s [%.2fs / %.0fs] %s%s\n", pass ? "PASS" : "FAIL", cr.id,
                cr.name, secs, cr.budget_s, checks.Summary().c_str(),
                !pass && known ? " (known failure)" : "");
    std::fflush(stdout);
  }
  return failures;
}

}  // namespace
}  // namespace attrib

int main(int argc, char** argv) {
  std::vector<int> known;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--known-failure" && i + 1 < argc) {
      known.push_back(std::atoi(argv[++i]));
    } else if (arg == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr,
                   "usage: acceptance [--only <id>] [--known-failure <id>]...\n");
      return 64;
    }
  }
  return attrib::Main(known, only);
}
