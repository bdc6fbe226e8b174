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

#include "attrib/dataset.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "attrib/error.h"
#include "attrib/image_io.h"
#include "attrib/random.h"

namespace attrib {

std::vector<Annotation> ParseAnnotations(std::istream& in) {
  std::vector<Annotation> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    Annotation a;
    ls >> a.filename >> a.class_id;
    if (!ls || a.class_id < 0) {
      throw IoError("annotation line " + std::to_string(line_no) +
                    ": expected '<filename> <class_id> <boxes...>'");
    }
    std::vector<long long> coords;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) {
        throw IoError("annotation line " + std::to_string(line_no) +
                      ": '" + tok + "' is not an integer");
      }
      coords.push_back(v);
    }
    if (coords.empty() || coords.size() % 4 != 0) {
      throw IoError("annotation line " + std::to_string(line_no) +
                    ": box coordinates must come in groups of four");
    }
    for (std::size_t i = 0; i < coords.size(); i += 4) {
      BoundingBox b{static_cast<int>(coords[i]), static_cast<int>(coords[i + 1]),
                    static_cast<int>(coords[i + 2]),
                    static_cast<int>(coords[i + 3])};
      if (b.x_min < 0 || b.y_min < 0 || b.x_min > b.x_max || b.y_min > b.y_max) {
        throw IoError("annotation line " + std::to_string(line_no) +
                      ": invalid box");
      }
      a.boxes.push_back(b);
    }
    entries.push_back(std::move(a));
  }
  return entries;
}

void FormatAnnotations(const std::vector<Annotation>& entries,
                       std::ostream& out) {
  for (const Annotation& a : entries) {
    out << a.filename << ' ' << a.class_id;
    for (const BoundingBox& b : a.boxes) {
      out << ' ' << b.x_min << ' ' << b.y_min << ' ' << b.x_max << ' '
          << b.y_max;
    }
    out << '\n';
  }
}

Dataset Dataset::Load(const std::filesystem::path& dir,
                      const std::string& annotation_file) {
  const auto path = dir / annotation_file;
  std::ifstream in(path);
  if (!in) throw IoError("cannot read annotation file " + path.string());
  Dataset ds;
  ds.root_ = dir;
  ds.entries_ = ParseAnnotations(in);
  return ds;
}

Image Dataset::LoadImage(std::size_t i) const {
  const Annotation& a = entries_.at(i);
  Image img = ReadImage(root_ / a.filename);
  for (const BoundingBox& b : a.boxes) {
    if (b.x_max >= img.width() || b.y_max >= img.height()) {
      throw IoError(a.filename + ": annotated box lies outside the image");
    }
  }
  return img;
}

PerturbMask Dataset::LoadObjectMask(std::size_t i) const {
  const Annotation& a = entries_.at(i);
  const auto path = root_ / (a.filename + ".mask.png");
  if (!std::filesystem::exists(path)) {
    throw IoError("missing object mask " + path.string());
  }
  return PerturbMask(ReadGrayPng(path), MaskKind::kContinuous).Binarized(0.5);
}

std::vector<LabeledImage> ReadClassFolders(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("not a directory: " + dir.string());
  }
  std::vector<std::pair<int, std::filesystem::path>> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    if (name.empty() ||
        !std::all_of(name.begin(), name.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      continue;
    }
    const int label = std::stoi(name);
    for (const auto& f : std::filesystem::directory_iterator(entry.path())) {
      if (f.path().extension() == ".png") files.emplace_back(label, f.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<LabeledImage> out;
  out.reserve(files.size());
  for (const auto& [label, path] : files) out.push_back({ReadImage(path), label});
  return out;
}

ShapeSample GenerateShape(int size, int label, std::uint64_t seed,
                          std::uint64_t index) {
  if (size < 16) throw ParameterError("shape images must be >= 16 pixels");
  if (label < 0 || label > kBackgroundClass) {
    throw ParameterError("shape label must be 0, 1 or 2");
  }
  Rng rng(CounterHash(seed, index));
  ShapeSample s;
  s.label = label;
  s.image = Image(size, size);

  // Smooth background: base color plus a few low-frequency waves.
  double base[3];
  for (double& b : base) b = 0.2 + 0.2 * rng.Uniform();
  struct Wave {
    double fx, fy, phase, amp[3];
  };
  Wave waves[3];
  for (Wave& w : waves) {
    const double angle = 2.0 * M_PI * rng.Uniform();
    const double freq = (0.5 + 1.5 * rng.Uniform()) / size;
    w.fx = std::cos(angle) * freq;
    w.fy = std::sin(angle) * freq;
    w.phase = 2.0 * M_PI * rng.Uniform();
    for (double& a : w.amp) a = 0.06 * (rng.Uniform() - 0.5) * 2.0;
  }
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        double v = base[ch];
        for (const Wave& w : waves) {
          v += w.amp[ch] * std::sin(2.0 * M_PI * (w.fx * c + w.fy * r) + w.phase);
        }
        s.image(r, c, ch) = std::clamp(v, 0.0, 1.0);
      }
    }
  }

  Field mask(size, size, 0.0);
  if (label != kBackgroundClass) {
    const int extent = static_cast<int>(std::lround(
        size * (0.12 + 0.08 * rng.Uniform())));
    const int margin = std::max(1, size / 32);
    const int span = size - extent - 2 * margin;
    const int top = margin + static_cast<int>(rng.Below(span + 1));
    const int left = margin + static_cast<int>(rng.Below(span + 1));
    // Bright, with a class-specific hue: warm squares, cool disks.
    double color[3];
    const double lo[2][3] = {{0.85, 0.55, 0.10}, {0.10, 0.60, 0.85}};
    for (int ch = 0; ch < 3; ++ch) color[ch] = lo[label][ch] + 0.15 * rng.Uniform();
    const double cy = top + 0.5 * (extent - 1);
    const double cx = left + 0.5 * (extent - 1);
    const double radius = 0.5 * extent;
    BoundingBox box{size, size, -1, -1};
    for (int r = top; r < top + extent; ++r) {
      for (int c = left; c < left + extent; ++c) {
        bool inside = true;
        if (label == kDiskClass) {
          const double dy = r - cy, dx = c - cx;
          inside = dx * dx + dy * dy <= radius * radius;
        }
        if (!inside) continue;
        mask(r, c) = 1.0;
        for (int ch = 0; ch < 3; ++ch) s.image(r, c, ch) = color[ch];
        box.x_min = std::min(box.x_min, c);
        box.y_min = std::min(box.y_min, r);
        box.x_max = std::max(box.x_max, c);
        box.y_max = std::max(box.y_max, r);
      }
    }
    s.box = box;
  }
  s.object_mask = PerturbMask(std::move(mask), MaskKind::kBinary);
  // Quantize so that the PNG round trip is exact.
  for (double& v : s.image.values()) v = std::round(v * 255.0) / 255.0;
  return s;
}

namespace {

std::string IndexedName(const std::string& prefix, std::size_t i) {
  std::ostringstream os;
  os << prefix << std::setw(4) << std::setfill('0') << i << ".png";
  return os.str();
}

}  // namespace

std::vector<Annotation> WriteAnnotatedSet(const std::filesystem::path& dir,
                                          const std::vector<ShapeSample>& samples,
                                          const std::string& prefix) {
  std::filesystem::create_directories(dir);
  std::vector<Annotation> entries;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const ShapeSample& s = samples[i];
    if (!s.box) continue;
    const std::string name = IndexedName(prefix, i);
    WriteImage(s.image, dir / name);
    WriteGrayPng(s.object_mask.values(), dir / (name + ".mask.png"));
    entries.push_back({name, s.label, {*s.box}});
  }
  std::ofstream out(dir / kAnnotationFile);
  if (!out) throw IoError("cannot write " + (dir / kAnnotationFile).string());
  FormatAnnotations(entries, out);
  if (!out) throw IoError("cannot write " + (dir / kAnnotationFile).string());
  return entries;
}

void WriteClassFolders(const std::filesystem::path& dir,
                       const std::vector<ShapeSample>& samples,
                       const std::string& prefix) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto sub = dir / std::to_string(samples[i].label);
    std::filesystem::create_directories(sub);
    WriteImage(samples[i].image, sub / IndexedName(prefix, i));
  }
}

}  // namespace attrib
