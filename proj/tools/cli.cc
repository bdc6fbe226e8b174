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

#include "cli.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "attrib/dataset.h"
#include "attrib/error.h"
#include "attrib/eval_metrics.h"
#include "attrib/fillers.h"
#include "attrib/image_io.h"
#include "attrib/lime.h"
#include "attrib/mask_opt.h"
#include "attrib/oracle.h"
#include "attrib/parallel.h"
#include "attrib/random.h"
#include "attrib/score_server.h"
#include "attrib/sensitivity.h"
#include "attrib/sliding_patch.h"
#include "attrib/tiny_cnn.h"

namespace attrib::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

std::string Fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> ParseDoubles(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const std::string& item : SplitList(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ParameterError(what + ": '" + item + "' is not a number");
    }
  }
  return out;
}

std::vector<int> ParseInts(const std::string& s, const std::string& what) {
  std::vector<int> out;
  for (double v : ParseDoubles(s, what)) {
    if (v != static_cast<int>(v)) {
      throw ParameterError(what + ": '" + Fmt(v) + "' is not an integer");
    }
    out.push_back(static_cast<int>(v));
  }
  return out;
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::ofstream OpenCsv(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

// --- options shared by several commands -----------------------------------

struct ModelOptions {
  std::string model;
  std::string score_server;
  int num_classes = 0;
  double server_timeout = 60.0;
  bool finite_diff = false;
  double fd_step = kDefaultFiniteDiffStep;
};

struct FillerOptions {
  std::string gray_color = "0.485,0.456,0.406";
  std::uint64_t noise_seed = 0;
  double blur_sigma = 10.0;
  int inpaint_iterations = 2000;
  double inpaint_tolerance = 1e-4;
  double ext_timeout = 60.0;
  int ext_native_size = 0;
  int ext_parallel = 1;
};

// Method hyperparameters; -1 means "the method's own default".
struct MethodOptions {
  std::string method;
  std::string filler;
  int target_class = -1;
  std::uint64_t seed = 0;
  int threads = 1;
  // sp
  int patch = 29;
  int stride = 3;
  bool dump_positions = false;
  // lime
  int segments = 50;
  int samples = 1000;
  double kernel_width = 0.25;
  double lasso_lambda = 0.01;
  int fit_steps = 1000;
  double occlusion_prob = 0.5;
  double compactness = 10.0;
  int slic_iterations = 10;
  bool dump_samples = false;
  // mp / mp2 / fido
  int mask_size = -1;
  double lambda1 = 0.01;
  double lambda2 = 0.2;
  double tv_beta = 3.0;
  int steps = 300;
  double lr = -1.0;
  int jitter_batch = 4;
  bool deterministic_jitter = false;
  int pixels_per_step = 2;
  double stop_prob = 0.001;
  int max_steps = 0;
  std::string selection = "magnitude";
  int probe_block = 0;
  double reg = 0.001;
  double init = 0.5;
};

void AddModelOptions(CLI::App* app, ModelOptions& o) {
  app->add_option("--model", o.model, "TinyCNN model file (.tcnn)");
  app->add_option("--score-server", o.score_server,
                  "external classifier command (line protocol)");
  app->add_option("--num-classes", o.num_classes,
                  "class count of the external classifier");
  app->add_option("--server-timeout", o.server_timeout,
                  "seconds per external classifier request");
  app->add_flag("--finite-diff", o.finite_diff,
                "estimate input gradients by central differences");
  app->add_option("--fd-step", o.fd_step, "finite-difference step");
}

void AddFillerOptions(CLI::App* app, FillerOptions& o) {
  app->add_option("--gray-color", o.gray_color, "gray filler color r,g,b");
  app->add_option("--noise-seed", o.noise_seed, "noise filler seed");
  app->add_option("--blur-sigma", o.blur_sigma,
                  "Gaussian sigma of the blur filler and of MP");
  app->add_option("--inpaint-iterations", o.inpaint_iterations,
                  "relaxation sweeps of the builtin inpainter");
  app->add_option("--inpaint-tolerance", o.inpaint_tolerance,
                  "convergence tolerance of the builtin inpainter");
  app->add_option("--inpaint-timeout", o.ext_timeout,
                  "seconds per external inpainter call");
  app->add_option("--inpaint-native-size", o.ext_native_size,
                  "square resolution the external inpainter works at");
  app->add_option("--inpaint-parallel", o.ext_parallel,
                  "concurrent external inpainter calls");
}

void AddMethodOptions(CLI::App* app, MethodOptions& o, bool with_method) {
  if (with_method) {
    app->add_option("--method", o.method, "sp, lime, mp, mp2 or fido")
        ->required();
  }
  app->add_option("--filler", o.filler,
                  "gray, noise, blur, inpaint or inpaint-ext:<cmd>");
  app->add_option("--class", o.target_class,
                  "target class (default: the top-1 prediction)");
  app->add_option("--seed", o.seed, "random seed");
  app->add_option("--patch", o.patch, "sp: patch size");
  app->add_option("--stride", o.stride, "sp: stride");
  app->add_flag("--dump-positions", o.dump_positions,
                "sp: write per-position probabilities");
  app->add_option("--segments", o.segments, "lime: superpixel count");
  app->add_option("--samples", o.samples, "lime: perturbation samples");
  app->add_option("--kernel-width", o.kernel_width, "lime: kernel width");
  app->add_option("--lasso-lambda", o.lasso_lambda, "lime: L1 weight");
  app->add_option("--fit-steps", o.fit_steps,
                  "lime: coordinate-descent cycles");
  app->add_option("--occlusion-prob", o.occlusion_prob,
                  "lime: probability of occluding a superpixel");
  app->add_option("--compactness", o.compactness, "lime: SLIC compactness");
  app->add_option("--slic-iterations", o.slic_iterations,
                  "lime: SLIC iterations");
  app->add_flag("--dump-samples", o.dump_samples,
                "lime: write every perturbation sample");
  app->add_option("--mask-size", o.mask_size,
                  "mp/mp2/fido: coarse mask side (default 28, fido 56)");
  app->add_option("--lambda1", o.lambda1, "mp: L1 weight");
  app->add_option("--lambda2", o.lambda2, "mp: TV weight");
  app->add_option("--tv-beta", o.tv_beta, "mp: TV exponent");
  app->add_option("--steps", o.steps, "mp/fido: optimization steps");
  app->add_option("--lr", o.lr, "mp/fido: learning rate (0.1 / 0.05)");
  app->add_option("--jitter-batch", o.jitter_batch,
                  "mp: jitter samples per step");
  app->add_flag("--deterministic-jitter", o.deterministic_jitter,
                "mp: average over all nine jitters every step");
  app->add_option("--pixels-per-step", o.pixels_per_step,
                  "mp2: coarse pixels added per iteration");
  app->add_option("--stop-prob", o.stop_prob, "mp2: stopping probability");
  app->add_option("--max-steps", o.max_steps,
                  "mp2: iteration cap (0: mask_size^2 / pixels_per_step)");
  app->add_option("--selection", o.selection,
                  "mp2: magnitude or negative gradient ranking")
      ->check(CLI::IsMember({"magnitude", "negative"}));
  app->add_option("--probe-block", o.probe_block,
                  "mp2/fido: dense-fill checkerboard block (0: auto)");
  app->add_option("--reg", o.reg, "fido: size regularizer");
  app->add_option("--init", o.init, "fido: initial keep value");
}

std::shared_ptr<const ClassifierOracle> LoadOracle(const ModelOptions& o) {
  std::shared_ptr<const ClassifierOracle> oracle;
  if (!o.model.empty() && !o.score_server.empty()) {
    throw ParameterError("--model and --score-server are mutually exclusive");
  }
  if (!o.model.empty()) {
    oracle = std::make_shared<TinyCnn>(LoadModel(o.model));
  } else if (!o.score_server.empty()) {
    if (o.num_classes < 1) {
      throw ParameterError("--score-server needs --num-classes");
    }
    if (!(o.server_timeout > 0.0)) {
      throw ParameterError("--server-timeout must be > 0");
    }
    oracle = std::make_shared<ExternalScoreOracle>(
        o.score_server, o.num_classes,
        std::chrono::milliseconds(
            static_cast<long long>(o.server_timeout * 1000.0)));
  } else {
    throw ParameterError("one of --model or --score-server is required");
  }
  if (o.finite_diff) oracle = std::make_shared<FiniteDiffOracle>(oracle, o.fd_step);
  return oracle;
}

std::shared_ptr<const FillStrategy> MakeFiller(const std::string& spec,
                                               const FillerOptions& o) {
  if (spec == "gray") {
    const std::vector<double> c = ParseDoubles(o.gray_color, "--gray-color");
    if (c.size() != 3) throw ParameterError("--gray-color needs r,g,b");
    return std::make_shared<GrayFiller>(std::array<double, 3>{c[0], c[1], c[2]});
  }
  if (spec == "noise") return std::make_shared<NoiseFiller>(o.noise_seed);
  if (spec == "blur") return std::make_shared<BlurFiller>(o.blur_sigma);
  if (spec == "real") return std::make_shared<IdentityFiller>();
  if (spec == "inpaint") {
    InpaintOptions io;
    io.max_iterations = o.inpaint_iterations;
    io.tolerance = o.inpaint_tolerance;
    return std::make_shared<CachedFiller>(std::make_shared<HarmonicInpainter>(io));
  }
  const std::string ext = "inpaint-ext:";
  if (spec.rfind(ext, 0) == 0) {
    const std::string command = spec.substr(ext.size());
    if (command.empty()) throw ParameterError("inpaint-ext: needs a command");
    if (!(o.ext_timeout > 0.0)) {
      throw ParameterError("--inpaint-timeout must be > 0");
    }
    ExternalInpainterOptions eo;
    eo.timeout = std::chrono::milliseconds(
        static_cast<long long>(o.ext_timeout * 1000.0));
    eo.native_size = o.ext_native_size;
    eo.max_parallel = o.ext_parallel;
    return std::make_shared<CachedFiller>(
        std::make_shared<ExternalInpainter>(command, eo));
  }
  throw ParameterError("unknown filler '" + spec + "'");
}

std::string DefaultFiller(const std::string& method) {
  if (method == "mp" || method == "mp2") return "blur";
  if (method == "fido") return "inpaint";
  return "gray";
}

bool IsInpainter(const std::string& filler) {
  return filler.rfind("inpaint", 0) == 0;
}

// Row label used in evaluation tables: "SP", "SP-G", "MP2", ...
std::string MethodLabel(const std::string& method, const std::string& filler) {
  std::string label = method;
  std::transform(label.begin(), label.end(), label.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if ((method == "sp" || method == "lime" || method == "mp2") &&
      IsInpainter(filler)) {
    label += "-G";
  }
  return label;
}

// Extra per-method files land at <prefix>trace.csv and similar.
struct DumpTarget {
  fs::path dir;
  std::string prefix;
  fs::path Path(const std::string& name) const { return dir / (prefix + name); }
};

AttributionMap RunMethod(const MethodOptions& m, const FillerOptions& fo,
                         const Image& x, const ClassifierOracle& oracle,
                         int target, std::uint64_t item_index, int threads,
                         const std::optional<DumpTarget>& dump) {
  const std::string filler_name = m.filler.empty() ? DefaultFiller(m.method)
                                                    : m.filler;
  if (m.method == "random") {
    Field f(x.height(), x.width());
    const std::uint64_t stream = CounterHash(m.seed, item_index);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = CounterUniform(stream, i);
    return AttributionMap(std::move(f), {"random", {{"seed", std::to_string(m.seed)}}});
  }
  if (m.method == "baseline") {
    // Uniform map: its derived box is the whole image.
    return AttributionMap(Field(x.height(), x.width(), 1.0), {"baseline", {}});
  }
  if (m.method == "sp") {
    SpConfig c;
    c.patch = m.patch;
    c.stride = m.stride;
    c.filler = MakeFiller(filler_name, fo);
    c.target_class = target;
    c.threads = threads;
    SpResult r = SlidingPatch(x, oracle, c);
    if (dump && m.dump_positions) {
      WriteSpProbabilities(r, dump->Path("positions.csv"));
    }
    return std::move(r.map);
  }
  if (m.method == "lime") {
    LimeConfig c;
    c.num_segments = m.segments;
    c.num_samples = m.samples;
    c.kernel_width = m.kernel_width;
    c.lasso_lambda = m.lasso_lambda;
    c.fit_steps = m.fit_steps;
    c.occlusion_prob = m.occlusion_prob;
    c.seed = m.seed;
    c.compactness = m.compactness;
    c.slic_iterations = m.slic_iterations;
    c.filler = MakeFiller(filler_name, fo);
    c.target_class = target;
    c.threads = threads;
    c.keep_images = dump.has_value() && m.dump_samples;
    LimeResult r = LimeAttribute(x, oracle, c);
    if (dump && m.dump_samples) {
      WriteLimeSamples(r, dump->Path("samples"));
      WriteSegmentation(r.segmentation, dump->Path("segments.png"),
                        dump->Path("segments.segm"));
    }
    return std::move(r.map);
  }
  if (m.method == "mp") {
    if (!m.filler.empty() && m.filler != "blur") {
      throw ParameterError("mp always perturbs with its own blur; drop --filler");
    }
    MpConfig c;
    c.mask_size = m.mask_size > 0 ? m.mask_size : 28;
    c.lambda1 = m.lambda1;
    c.lambda2 = m.lambda2;
    c.tv_beta = m.tv_beta;
    c.steps = m.steps;
    c.lr = m.lr > 0.0 ? m.lr : 0.1;
    c.jitter_batch = m.jitter_batch;
    c.deterministic_jitter = m.deterministic_jitter;
    c.blur_sigma = fo.blur_sigma;
    c.target_class = target;
    c.seed = m.seed;
    MpResult r = MpAttribute(x, oracle, c);
    if (dump) WriteMpTrace(r, dump->Path("trace.csv"));
    return std::move(r.map);
  }
  if (m.method == "mp2") {
    Mp2Config c;
    c.mask_size = m.mask_size > 0 ? m.mask_size : 28;
    c.pixels_per_step = m.pixels_per_step;
    c.stop_prob = m.stop_prob;
    c.max_steps = m.max_steps;
    c.filler = MakeFiller(filler_name, fo);
    c.target_class = target;
    c.selection = m.selection == "negative" ? Mp2Selection::kMostNegative
                                            : Mp2Selection::kLargestMagnitude;
    c.probe_block = m.probe_block;
    Mp2Result r = Mp2Attribute(x, oracle, c);
    if (dump) WriteMp2Trace(r, dump->Path("trace.csv"));
    return std::move(r.map);
  }
  if (m.method == "fido") {
    FidoConfig c;
    c.mask_size = m.mask_size > 0 ? m.mask_size : 56;
    c.lr = m.lr > 0.0 ? m.lr : 0.05;
    c.reg = m.reg;
    c.steps = m.steps;
    c.init = m.init;
    c.filler = MakeFiller(filler_name, fo);
    c.target_class = target;
    c.probe_block = m.probe_block;
    FidoResult r = FidoAttribute(x, oracle, c);
    if (dump) WriteFidoTrace(r, dump->Path("trace.csv"));
    return std::move(r.map);
  }
  throw ParameterError("unknown method '" + m.method + "'");
}

// --- resolved configuration ------------------------------------------------

// Options that never influence results are left out so that reruns with a
// different worker count or output directory write identical files.
bool OmitFromConfig(const std::string& name) {
  return name == "threads" || name == "out" || name == "config" ||
         name == "help";
}

json ResolvedOptions(const CLI::App& app) {
  json j = json::object();
  std::vector<const CLI::Option*> options = app.get_options();
  std::sort(options.begin(), options.end(),
            [](const CLI::Option* a, const CLI::Option* b) {
              return a->get_name() < b->get_name();
            });
  for (const CLI::Option* opt : options) {
    std::string name = opt->get_single_name();
    if (name.empty() || OmitFromConfig(name)) continue;
    if (opt->get_expected_max() == 0) {
      j[name] = opt->count() > 0 && opt->as<bool>();
    } else if (opt->count() > 0) {
      j[name] = opt->as<std::string>();
    } else {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

void WriteConfig(const fs::path& path, const std::string& command,
                 const CLI::App& app, const json& extra) {
  json j;
  j["tool_version"] = kVersion;
  j["command"] = command;
  j["options"] = ResolvedOptions(app);
  for (const auto& [k, v] : extra.items()) j[k] = v;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

json ProvenanceJson(const Provenance& p) {
  json params = json::object();
  for (const auto& [k, v] : p.params) params[k] = v;
  return {{"method", p.method}, {"params", params}};
}

// Expands "--config file.json" into flags placed right after the subcommand,
// so that explicit flags (which come later) take precedence.
std::vector<std::string> ExpandConfig(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.empty()) return args;
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParameterError("config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ParameterError("config " + path + " must be an object");
  std::vector<std::string> flags;
  for (const auto& [key, value] : j.items()) {
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) flags.push_back(flag);
    } else if (value.is_string()) {
      flags.push_back(flag + "=" + value.get<std::string>());
    } else if (value.is_number()) {
      flags.push_back(flag + "=" + value.dump());
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) {
        if (!joined.empty()) joined += ",";
        joined += item.is_string() ? item.get<std::string>() : item.dump();
      }
      flags.push_back(flag + "=" + joined);
    } else {
      throw ParameterError("config key '" + key + "' has an unsupported value");
    }
  }
  std::vector<std::string> out;
  out.push_back(args[0]);
  out.insert(out.end(), flags.begin(), flags.end());
  out.insert(out.end(), args.begin() + 1, args.end());
  return out;
}

// --- attribute --------------------------------------------------------------

struct AttributeArgs {
  ModelOptions model;
  FillerOptions filler;
  MethodOptions method;
  std::string image;
  std::string dataset;
  std::string out;
  std::string config;
  int threads = 1;
  int limit = 0;
};

std::string Stem(const std::string& filename) {
  return fs::path(filename).stem().string();
}

int CmdAttribute(const AttributeArgs& a, const CLI::App& app, std::ostream& out) {
  if (a.image.empty() == a.dataset.empty()) {
    throw ParameterError("give exactly one of --image or --dataset");
  }
  if (a.threads < 1) throw ParameterError("--threads must be >= 1");
  const auto oracle = LoadOracle(a.model);
  const fs::path out_dir = a.out;
  EnsureDir(out_dir);

  if (!a.image.empty()) {
    const Image x = ReadImage(a.image);
    const int target =
        a.method.target_class >= 0 ? a.method.target_class : oracle->Top1(x);
    const AttributionMap map =
        RunMethod(a.method, a.filler, x, *oracle, target, 0, a.threads,
                  DumpTarget{out_dir, ""});
    WriteHeatmap(map, out_dir / "heatmap.png", out_dir / "heatmap.hmap");
    json extra;
    extra["target_class"] = target;
    extra["provenance"] = ProvenanceJson(map.provenance());
    WriteConfig(out_dir / "config.json", "attribute", app, extra);
    out << "wrote " << (out_dir / "heatmap.hmap").string() << " (class "
        << target << ")\n";
    return kExitOk;
  }

  const Dataset ds = Dataset::Load(a.dataset);
  if (ds.size() == 0) throw ParameterError("dataset " + a.dataset + " is empty");
  const std::size_t n = a.limit > 0 ? std::min<std::size_t>(ds.size(), a.limit)
                                    : ds.size();
  std::vector<int> targets(n);
  std::vector<std::optional<Error>> errors(n);
  std::vector<std::string> messages(n);
  ParallelFor(n, a.threads, [&](std::size_t i) {
    try {
      const Image x = ds.LoadImage(i);
      const int target = a.method.target_class >= 0 ? a.method.target_class
                                                    : ds.entries()[i].class_id;
      const std::string stem = Stem(ds.entries()[i].filename);
      const AttributionMap map =
          RunMethod(a.method, a.filler, x, *oracle, target, i, 1,
                    DumpTarget{out_dir, stem + "."});
      WriteHeatmap(map, out_dir / (stem + ".png"), out_dir / (stem + ".hmap"));
      targets[i] = target;
    } catch (const std::exception& e) {
      messages[i] = ds.entries()[i].filename + ": " + e.what();
      throw;
    }
  });
  json extra;
  extra["images"] = n;
  WriteConfig(out_dir / "config.json", "attribute", app, extra);
  out << "wrote " << n << " heatmaps to " << out_dir.string() << "\n";
  return kExitOk;
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  ModelOptions model;
  FillerOptions filler;
  MethodOptions method;
  std::string metric;
  std::string dataset;
  std::string maps;
  std::string heldout;
  std::string heldout_maps;
  bool select_alpha = false;
  double alpha = 0.5;
  std::string alpha_grid;
  int step = 0;
  std::string fillers = "real,gray,noise,blur,inpaint";
  double full_blur_sigma = 10.0;
  std::string out;
  std::string config;
  int threads = 1;
  int limit = 0;
};

struct LoadedSet {
  std::vector<Annotation> entries;
  std::vector<Image> images;
};

LoadedSet LoadSet(const std::string& dir, int limit) {
  const Dataset ds = Dataset::Load(dir);
  if (ds.size() == 0) throw ParameterError("dataset " + dir + " is empty");
  const std::size_t n = limit > 0 ? std::min<std::size_t>(ds.size(), limit)
                                  : ds.size();
  LoadedSet set;
  set.entries.assign(ds.entries().begin(), ds.entries().begin() + n);
  for (std::size_t i = 0; i < n; ++i) set.images.push_back(ds.LoadImage(i));
  return set;
}

// Maps for every image: read from maps_dir/<stem>.hmap, or computed.
std::vector<Field> MapsFor(const LoadedSet& set, const std::string& maps_dir,
                           const EvaluateArgs& a,
                           const ClassifierOracle& oracle) {
  std::vector<Field> maps(set.images.size());
  if (!maps_dir.empty()) {
    for (std::size_t i = 0; i < maps.size(); ++i) {
      const fs::path p = fs::path(maps_dir) / (Stem(set.entries[i].filename) + ".hmap");
      maps[i] = ReadHeatmapRaw(p);
      if (!set.images[i].same_spatial(maps[i])) {
        throw ShapeError(p.string() + " does not match its image size");
      }
    }
    return maps;
  }
  if (a.method.method.empty()) {
    throw ParameterError("give --maps or --method to obtain heatmaps");
  }
  ParallelFor(maps.size(), a.threads, [&](std::size_t i) {
    maps[i] = RunMethod(a.method, a.filler, set.images[i], oracle,
                        set.entries[i].class_id, i, 1, std::nullopt)
                  .values();
  });
  return maps;
}

std::string EvalLabel(const EvaluateArgs& a) {
  if (!a.maps.empty()) return "maps";
  const std::string filler =
      a.method.filler.empty() ? DefaultFiller(a.method.method) : a.method.filler;
  return MethodLabel(a.method.method, filler);
}

std::vector<double> AlphaGrid(const EvaluateArgs& a) {
  if (a.alpha_grid.empty()) return DefaultAlphaGrid();
  std::vector<double> grid = ParseDoubles(a.alpha_grid, "--alpha-grid");
  if (grid.empty()) throw ParameterError("--alpha-grid is empty");
  return grid;
}

double ChooseAlpha(const EvaluateArgs& a, const ClassifierOracle& oracle,
                   const fs::path& out_dir, json& extra) {
  if (!a.select_alpha) return a.alpha;
  if (a.heldout.empty()) throw ParameterError("--select-alpha needs --heldout");
  if (!a.maps.empty() && a.heldout_maps.empty()) {
    throw ParameterError("--maps with --select-alpha needs --heldout-maps");
  }
  const LoadedSet held = LoadSet(a.heldout, 0);
  const std::vector<Field> maps = MapsFor(held, a.heldout_maps, a, oracle);
  std::vector<LocalizationItem> items;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    items.push_back({maps[i], held.entries[i].boxes});
  }
  const std::vector<double> grid = AlphaGrid(a);
  const AlphaSelection sel = SelectAlpha(items, grid);
  std::ofstream csv = OpenCsv(out_dir / "alpha_selection.csv");
  csv << "alpha,heldout_error\n";
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    csv << Fmt(sorted[k]) << "," << Fmt(sel.errors[k]) << "\n";
  }
  extra["selected_alpha"] = sel.alpha;
  extra["heldout_error"] = sel.error;
  return sel.alpha;
}

int CmdEvaluate(const EvaluateArgs& a, const CLI::App& app, std::ostream& out) {
  if (a.threads < 1) throw ParameterError("--threads must be >= 1");
  const fs::path out_dir = a.out;
  const LoadedSet set = LoadSet(a.dataset, a.limit);
  const auto oracle = LoadOracle(a.model);
  EnsureDir(out_dir);
  json extra;
  extra["images"] = set.images.size();
  const std::size_t n = set.images.size();

  if (a.metric == "compare-fillers") {
    const Dataset ds = Dataset::Load(a.dataset);
    std::vector<FillerItem> items;
    for (std::size_t i = 0; i < n; ++i) {
      items.push_back({set.images[i], ds.LoadObjectMask(i), set.entries[i].class_id});
    }
    std::vector<std::shared_ptr<const FillStrategy>> fillers;
    for (const std::string& name : SplitList(a.fillers)) {
      fillers.push_back(MakeFiller(name, a.filler));
    }
    if (fillers.empty()) throw ParameterError("--fillers is empty");
    const std::vector<FillerRow> rows = CompareFillers(items, *oracle, fillers, a.threads);
    std::vector<LabeledInput> inputs;
    for (std::size_t i = 0; i < n; ++i) {
      inputs.push_back({set.images[i], set.entries[i].class_id});
    }
    const double blur_conf =
        FullBlurConfidence(inputs, *oracle, a.full_blur_sigma, a.threads);
    std::ofstream csv = OpenCsv(out_dir / "compare_fillers.csv");
    csv << "filler,accuracy,ms_ssim,count\n";
    for (const FillerRow& r : rows) {
      csv << r.filler << "," << Fmt(r.accuracy) << "," << Fmt(r.ms_ssim) << ","
          << r.count << "\n";
      out << r.filler << ": accuracy " << Fmt(r.accuracy) << ", ms-ssim "
          << Fmt(r.ms_ssim) << "\n";
    }
    extra["full_blur_confidence"] = blur_conf;
    out << "full-blur confidence " << Fmt(blur_conf) << "\n";
    WriteConfig(out_dir / "config.json", "evaluate", app, extra);
    return kExitOk;
  }

  const std::string label = EvalLabel(a);
  if (a.metric == "localization") {
    const double alpha = ChooseAlpha(a, *oracle, out_dir, extra);
    const std::vector<Field> maps = MapsFor(set, a.maps, a, *oracle);
    std::vector<LocalizationItem> items;
    for (std::size_t i = 0; i < n; ++i) items.push_back({maps[i], set.entries[i].boxes});
    const double error = LocalizationError(items, alpha);
    {
      std::ofstream csv = OpenCsv(out_dir / "localization.csv");
      csv << "method,alpha,error,images\n"
          << label << "," << Fmt(alpha) << "," << Fmt(error) << "," << n << "\n";
    }
    {
      std::ofstream csv = OpenCsv(out_dir / "localization_images.csv");
      csv << "filename,x_min,y_min,x_max,y_max,iou,hit\n";
      for (std::size_t i = 0; i < n; ++i) {
        const LocalizationResult r = Localize(maps[i], set.entries[i].boxes, alpha);
        csv << set.entries[i].filename << "," << r.derived_box.x_min << ","
            << r.derived_box.y_min << "," << r.derived_box.x_max << ","
            << r.derived_box.y_max << "," << Fmt(r.iou) << "," << (r.hit ? 1 : 0)
            << "\n";
      }
    }
    {
      std::vector<double> grid = AlphaGrid(a);
      std::sort(grid.begin(), grid.end());
      std::ofstream csv = OpenCsv(out_dir / "localization_grid.csv");
      csv << "alpha,error\n";
      for (double g : grid) csv << Fmt(g) << "," << Fmt(LocalizationError(items, g)) << "\n";
    }
    extra["alpha"] = alpha;
    out << label << ": localization error " << Fmt(error) << " at alpha "
        << Fmt(alpha) << " over " << n << " images\n";
  } else if (a.metric == "deletion") {
    const std::vector<Field> maps = MapsFor(set, a.maps, a, *oracle);
    std::vector<double> auc(n);
    std::vector<int> steps(n);
    ParallelFor(n, a.threads, [&](std::size_t i) {
      steps[i] = a.step > 0 ? a.step : 8 * set.images[i].width();
      auc[i] = DeletionMetric(set.images[i], maps[i], *oracle,
                              set.entries[i].class_id, steps[i])
                   .auc;
    });
    double sum = 0.0;
    for (double v : auc) sum += v;
    const double mean = sum / static_cast<double>(n);
    {
      std::ofstream csv = OpenCsv(out_dir / "deletion.csv");
      csv << "method,mean_auc,images\n"
          << label << "," << Fmt(mean) << "," << n << "\n";
    }
    {
      std::ofstream csv = OpenCsv(out_dir / "deletion_images.csv");
      csv << "filename,step,auc\n";
      for (std::size_t i = 0; i < n; ++i) {
        csv << set.entries[i].filename << "," << steps[i] << "," << Fmt(auc[i]) << "\n";
      }
    }
    out << label << ": deletion AUC " << Fmt(mean) << " over " << n << " images\n";
  } else if (a.metric == "saliency") {
    const double alpha = ChooseAlpha(a, *oracle, out_dir, extra);
    const std::vector<Field> maps = MapsFor(set, a.maps, a, *oracle);
    std::vector<SaliencyResult> results(n);
    ParallelFor(n, a.threads, [&](std::size_t i) {
      results[i] = SaliencyMetric(set.images[i], maps[i], *oracle,
                                  set.entries[i].class_id, alpha);
    });
    double sum = 0.0;
    for (const SaliencyResult& r : results) sum += r.value;
    const double mean = sum / static_cast<double>(n);
    {
      std::ofstream csv = OpenCsv(out_dir / "saliency.csv");
      csv << "method,alpha,mean_saliency,images\n"
          << label << "," << Fmt(alpha) << "," << Fmt(mean) << "," << n << "\n";
    }
    {
      std::ofstream csv = OpenCsv(out_dir / "saliency_images.csv");
      csv << "filename,area_fraction,crop_score,value\n";
      for (std::size_t i = 0; i < n; ++i) {
        csv << set.entries[i].filename << "," << Fmt(results[i].area_fraction)
            << "," << Fmt(results[i].crop_score) << "," << Fmt(results[i].value)
            << "\n";
      }
    }
    extra["alpha"] = alpha;
    out << label << ": saliency " << Fmt(mean) << " at alpha " << Fmt(alpha)
        << " over " << n << " images\n";
  } else {
    throw ParameterError("unknown metric '" + a.metric + "'");
  }
  WriteConfig(out_dir / "config.json", "evaluate", app, extra);
  return kExitOk;
}

// --- sensitivity ------------------------------------------------------------

struct SensitivityArgs {
  ModelOptions model;
  FillerOptions filler;
  MethodOptions method;
  std::string axis;
  std::string values;
  std::string fillers;
  std::string dataset;
  std::string out;
  std::string config;
  int threads = 1;
  int limit = 0;
};

int CmdSensitivity(const SensitivityArgs& a, const CLI::App& app,
                   std::ostream& out) {
  if (a.threads < 1) throw ParameterError("--threads must be >= 1");
  SweepSpec spec;
  if (a.axis == "patch-sizes") {
    spec.method = SweepMethod::kSp;
  } else if (a.axis == "random-seeds") {
    spec.method = SweepMethod::kLime;
  } else if (a.axis == "mask-sizes") {
    spec.method = SweepMethod::kMp2;
  } else {
    throw ParameterError("unknown axis '" + a.axis + "'");
  }
  spec.axis = AxisFor(spec.method);
  spec.values = a.values.empty() ? DefaultAxisValues(spec.axis)
                                 : ParseInts(a.values, "--values");
  const MethodOptions& m = a.method;
  spec.sp.patch = m.patch;
  spec.sp.stride = m.stride;
  spec.lime.num_segments = m.segments;
  spec.lime.num_samples = m.samples;
  spec.lime.kernel_width = m.kernel_width;
  spec.lime.lasso_lambda = m.lasso_lambda;
  spec.lime.fit_steps = m.fit_steps;
  spec.lime.occlusion_prob = m.occlusion_prob;
  spec.lime.seed = m.seed;
  spec.lime.compactness = m.compactness;
  spec.lime.slic_iterations = m.slic_iterations;
  spec.mp2.mask_size = m.mask_size > 0 ? m.mask_size : 28;
  spec.mp2.pixels_per_step = m.pixels_per_step;
  spec.mp2.stop_prob = m.stop_prob;
  spec.mp2.max_steps = m.max_steps;
  spec.mp2.selection = m.selection == "negative" ? Mp2Selection::kMostNegative
                                                 : Mp2Selection::kLargestMagnitude;
  spec.mp2.probe_block = m.probe_block;
  spec.threads = a.threads;

  const std::string method_name = spec.method == SweepMethod::kSp     ? "sp"
                                  : spec.method == SweepMethod::kLime ? "lime"
                                                                      : "mp2";
  std::vector<std::string> filler_names =
      SplitList(a.fillers.empty() ? DefaultFiller(method_name) + ",inpaint"
                                  : a.fillers);
  if (filler_names.empty()) throw ParameterError("--fillers is empty");

  const LoadedSet set = LoadSet(a.dataset, a.limit);
  const auto oracle = LoadOracle(a.model);
  const fs::path out_dir = a.out;
  EnsureDir(out_dir);
  std::vector<SweepItem> items;
  for (std::size_t i = 0; i < set.images.size(); ++i) {
    const int target = m.target_class >= 0 ? m.target_class
                                           : set.entries[i].class_id;
    items.push_back({set.images[i], target});
  }
  std::vector<SweepResult> results;
  for (const std::string& name : filler_names) {
    results.push_back(RunSweep(items, spec, *oracle, MakeFiller(name, a.filler)));
  }
  WriteSweepCsv(results, out_dir / "sensitivity.csv");
  {
    std::ofstream csv = OpenCsv(out_dir / "sensitivity_images.csv");
    csv << "method,filename";
    for (const char* metric : kSweepMetricNames) csv << "," << metric;
    csv << "\n";
    for (const SweepResult& r : results) {
      for (std::size_t i = 0; i < items.size(); ++i) {
        csv << r.method << "," << set.entries[i].filename;
        for (int k = 0; k < kSweepMetrics; ++k) csv << "," << Fmt(r.per_image[k][i]);
        csv << "\n";
      }
    }
  }
  for (const SweepResult& r : results) {
    out << r.method << ":";
    for (int k = 0; k < kSweepMetrics; ++k) {
      out << " " << kSweepMetricNames[k] << " " << Fmt(r.mean[k]) << " +- "
          << Fmt(r.stddev[k]);
    }
    out << " (" << r.pairs_per_image << " pairs per image)\n";
  }
  json extra;
  extra["images"] = items.size();
  WriteConfig(out_dir / "config.json", "sensitivity", app, extra);
  return kExitOk;
}

// --- fixtures ---------------------------------------------------------------

struct FixturesArgs {
  std::string out;
  std::string config;
  std::uint64_t seed = 0;
  int size = 64;
  int count = 200;
  int heldout = 40;
  int train_per_class = 100;
  int epochs = 40;
  double lr = 0.01;
  double momentum = 0.9;
  int batch = 16;
  bool skip_train = false;
  int threads = 1;
};

// Index ranges that keep the three sets disjoint.
constexpr std::uint64_t kTrainBase = 0;
constexpr std::uint64_t kEvalBase = 1ULL << 32;
constexpr std::uint64_t kHeldoutBase = 2ULL << 32;

int CmdFixtures(const FixturesArgs& a, const CLI::App& app, std::ostream& out) {
  if (a.count < 1 || a.heldout < 1 || a.train_per_class < 1) {
    throw ParameterError("set sizes must be >= 1");
  }
  if (a.threads < 1) throw ParameterError("--threads must be >= 1");
  const fs::path root = a.out;
  EnsureDir(root);

  auto generate = [&](std::size_t n, std::uint64_t base, auto label_of) {
    std::vector<ShapeSample> samples(n);
    ParallelFor(n, a.threads, [&](std::size_t i) {
      samples[i] = GenerateShape(a.size, label_of(i), a.seed, base + i);
    });
    return samples;
  };
  auto object_label = [](std::size_t i) { return static_cast<int>(i % 2); };
  const std::vector<ShapeSample> eval = generate(a.count, kEvalBase, object_label);
  const std::vector<ShapeSample> held = generate(a.heldout, kHeldoutBase, object_label);
  const std::vector<ShapeSample> train = generate(
      static_cast<std::size_t>(a.train_per_class) * 3, kTrainBase,
      [&](std::size_t i) { return static_cast<int>(i / a.train_per_class); });

  WriteAnnotatedSet(root / "eval", eval, "eval_");
  WriteAnnotatedSet(root / "heldout", held, "heldout_");
  WriteClassFolders(root / "train", train, "train_");
  json extra;
  extra["eval_images"] = eval.size();
  extra["heldout_images"] = held.size();
  extra["train_images"] = train.size();
  out << "wrote " << eval.size() << " eval, " << held.size() << " held-out and "
      << train.size() << " training images to " << root.string() << "\n";

  if (!a.skip_train) {
    std::vector<LabeledImage> data;
    for (const ShapeSample& s : train) data.push_back({s.image, s.label});
    TinyCnnSpec spec;
    spec.input_height = a.size;
    spec.input_width = a.size;
    spec.num_classes = 3;
    TrainOptions opts;
    opts.epochs = a.epochs;
    opts.lr = a.lr;
    opts.momentum = a.momentum;
    opts.batch_size = a.batch;
    opts.seed = a.seed;
    TrainReport report;
    const TinyCnn model = TrainTinyCnn(data, spec, opts, &report);
    SaveModel(model, root / "model.tcnn");
    std::ofstream csv = OpenCsv(root / "train_report.csv");
    csv << "epoch,loss,accuracy\n";
    for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
      csv << e << "," << Fmt(report.epoch_loss[e]) << ","
          << Fmt(report.epoch_accuracy[e]) << "\n";
    }
    std::vector<LabeledImage> eval_data;
    for (const ShapeSample& s : eval) eval_data.push_back({s.image, s.label});
    const double eval_acc = Accuracy(model, eval_data);
    extra["train_accuracy"] = report.epoch_accuracy.back();
    extra["eval_accuracy"] = eval_acc;
    out << "trained model.tcnn: train accuracy "
        << Fmt(report.epoch_accuracy.back()) << ", eval accuracy "
        << Fmt(eval_acc) << "\n";
  }
  WriteConfig(root / "config.json", "fixtures", app, extra);
  return kExitOk;
}

int ExitCodeFor(const std::exception& e) {
  if (dynamic_cast<const ParameterError*>(&e) ||
      dynamic_cast<const ShapeError*>(&e)) {
    return kExitUsage;
  }
  if (dynamic_cast<const IoError*>(&e) ||
      dynamic_cast<const fs::filesystem_error*>(&e)) {
    return kExitIo;
  }
  return kExitMethod;
}

}  // namespace

int RunCli(const std::vector<std::string>& raw_args, std::ostream& out,
           std::ostream& err) {
  CLI::App app("Perturbation-based attribution maps and their evaluation",
               "attrib");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.option_defaults()->always_capture_default();

  AttributeArgs attr;
  CLI::App* attribute = app.add_subcommand("attribute", "compute an attribution map");
  AddModelOptions(attribute, attr.model);
  AddFillerOptions(attribute, attr.filler);
  AddMethodOptions(attribute, attr.method, true);
  attribute->add_option("--image", attr.image, "input image (PNG)");
  attribute->add_option("--dataset", attr.dataset,
                        "annotated directory: one map per image");
  attribute->add_option("--limit", attr.limit, "use the first N dataset images");
  attribute->add_option("--out", attr.out, "output directory")->required();
  attribute->add_option("--config", attr.config, "JSON file of default flags");
  attribute->add_option("--threads", attr.threads, "worker threads");

  EvaluateArgs ev;
  CLI::App* evaluate = app.add_subcommand("evaluate", "score attribution maps");
  evaluate->add_option("metric", ev.metric,
                       "localization, deletion, saliency or compare-fillers")
      ->required()
      ->check(CLI::IsMember({"localization", "deletion", "saliency",
                             "compare-fillers"}));
  AddModelOptions(evaluate, ev.model);
  AddFillerOptions(evaluate, ev.filler);
  evaluate->add_option("--method", ev.method.method,
                       "sp, lime, mp, mp2, fido, random or baseline");
  AddMethodOptions(evaluate, ev.method, false);
  evaluate->add_option("--dataset", ev.dataset, "annotated directory")->required();
  evaluate->add_option("--maps", ev.maps, "directory of <stem>.hmap heatmaps");
  evaluate->add_option("--heldout", ev.heldout, "held-out annotated directory");
  evaluate->add_option("--heldout-maps", ev.heldout_maps,
                       "heatmaps of the held-out set");
  evaluate->add_flag("--select-alpha", ev.select_alpha,
                     "grid-search alpha on the held-out set first");
  evaluate->add_option("--alpha", ev.alpha, "box threshold when not selecting");
  evaluate->add_option("--alpha-grid", ev.alpha_grid,
                       "comma-separated alpha grid (default 0:0.05:0.95)");
  evaluate->add_option("--step", ev.step,
                       "deletion: pixels per step (default 8 x width)");
  evaluate->add_option("--fillers", ev.fillers,
                       "compare-fillers: comma-separated strategies");
  evaluate->add_option("--full-blur-sigma", ev.full_blur_sigma,
                       "compare-fillers: sigma of the full-image blur");
  evaluate->add_option("--limit", ev.limit, "use the first N dataset images");
  evaluate->add_option("--out", ev.out, "output directory")->required();
  evaluate->add_option("--config", ev.config, "JSON file of default flags");
  evaluate->add_option("--threads", ev.threads, "worker threads");

  SensitivityArgs sens;
  CLI::App* sensitivity =
      app.add_subcommand("sensitivity", "hyperparameter sensitivity sweep");
  sensitivity->add_option("--axis", sens.axis,
                          "patch-sizes (SP), random-seeds (LIME) or "
                          "mask-sizes (MP2)")
      ->required()
      ->check(CLI::IsMember({"patch-sizes", "random-seeds", "mask-sizes"}));
  sensitivity->add_option("--values", sens.values,
                          "comma-separated axis values (default per axis)");
  sensitivity->add_option("--fillers", sens.fillers,
                          "comma-separated fillers, one result row each");
  AddModelOptions(sensitivity, sens.model);
  AddFillerOptions(sensitivity, sens.filler);
  AddMethodOptions(sensitivity, sens.method, false);
  sensitivity->add_option("--dataset", sens.dataset, "annotated directory")
      ->required();
  sensitivity->add_option("--limit", sens.limit, "use the first N images");
  sensitivity->add_option("--out", sens.out, "output directory")->required();
  sensitivity->add_option("--config", sens.config, "JSON file of default flags");
  sensitivity->add_option("--threads", sens.threads, "worker threads");

  FixturesArgs fix;
  CLI::App* fixtures =
      app.add_subcommand("fixtures", "write the synthetic dataset and model");
  fixtures->add_option("--out", fix.out, "output directory")->required();
  fixtures->add_option("--seed", fix.seed, "generator and training seed");
  fixtures->add_option("--size", fix.size, "image side in pixels");
  fixtures->add_option("--count", fix.count, "evaluation images");
  fixtures->add_option("--heldout", fix.heldout, "held-out images");
  fixtures->add_option("--train-per-class", fix.train_per_class,
                       "training images per class");
  fixtures->add_option("--epochs", fix.epochs, "training epochs");
  fixtures->add_option("--lr", fix.lr, "training learning rate");
  fixtures->add_option("--momentum", fix.momentum, "training momentum");
  fixtures->add_option("--batch", fix.batch, "training batch size");
  fixtures->add_flag("--skip-train", fix.skip_train, "only write the images");
  fixtures->add_option("--config", fix.config, "JSON file of default flags");
  fixtures->add_option("--threads", fix.threads, "worker threads");

  try {
    std::vector<std::string> args = ExpandConfig(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e);
  }

  try {
    if (attribute->parsed()) return CmdAttribute(attr, *attribute, out);
    if (evaluate->parsed()) return CmdEvaluate(ev, *evaluate, out);
    if (sensitivity->parsed()) return CmdSensitivity(sens, *sensitivity, out);
    if (fixtures->parsed()) return CmdFixtures(fix, *fixtures, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e);
  }
  return kExitUsage;
}

}  // namespace attrib::cli
