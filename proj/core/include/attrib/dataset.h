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

#ifndef ATTRIB_DATASET_H_
#define ATTRIB_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "attrib/image.h"
#include "attrib/tiny_cnn.h"

namespace attrib {

// One annotation line: <filename> <class_id> <x_min> <y_min> <x_max> <y_max>
// [more boxes...]
struct Annotation {
  std::string filename;
  int class_id = 0;
  std::vector<BoundingBox> boxes;
};

std::vector<Annotation> ParseAnnotations(std::istream& in);
void FormatAnnotations(const std::vector<Annotation>& entries, std::ostream& out);

inline constexpr const char* kAnnotationFile = "annotations.txt";

// Directory of PNGs plus an annotation file; object masks live next to the
// images as <filename>.mask.png (255 = object).
class Dataset {
 public:
  static Dataset Load(const std::filesystem::path& dir,
                      const std::string& annotation_file = kAnnotationFile);

  const std::filesystem::path& root() const { return root_; }
  const std::vector<Annotation>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  Image LoadImage(std::size_t i) const;
  // Binary object mask; throws IoError if the mask file is missing.
  PerturbMask LoadObjectMask(std::size_t i) const;

 private:
  std::filesystem::path root_;
  std::vector<Annotation> entries_;
};

// Labeled images from <dir>/<class_id>/<name>.png, ordered by class then name.
std::vector<LabeledImage> ReadClassFolders(const std::filesystem::path& dir);

// Synthetic shapes: a smooth random background with one bright planted
// object (class 0 = warm square, class 1 = cool disk) or none (class 2 = background).
struct ShapeSample {
  Image image;
  int label = 0;
  std::optional<BoundingBox> box;  // tight box of the object, if any
  PerturbMask object_mask;         // 1 on object pixels
};

inline constexpr int kSquareClass = 0;
inline constexpr int kDiskClass = 1;
inline constexpr int kBackgroundClass = 2;

// Deterministic in (seed, index).
ShapeSample GenerateShape(int size, int label, std::uint64_t seed,
                          std::uint64_t index);

// Writes <dir>/<prefix><i>.png, its .mask.png and an annotation file.
// Samples without an object are skipped.
std::vector<Annotation> WriteAnnotatedSet(const std::filesystem::path& dir,
                                          const std::vector<ShapeSample>& samples,
                                          const std::string& prefix);

// Writes <dir>/<label>/<prefix><i>.png.
void WriteClassFolders(const std::filesystem::path& dir,
                       const std::vector<ShapeSample>& samples,
                       const std::string& prefix);

}  // namespace attrib

#endif  // ATTRIB_DATASET_H_
