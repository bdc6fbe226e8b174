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

#ifndef ATTRIB_IMAGE_IO_H_
#define ATTRIB_IMAGE_IO_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "attrib/image.h"

namespace attrib {

// 8-bit RGB or grayscale PNG. Grayscale is expanded to three channels.
Image ReadImage(const std::filesystem::path& path);
void WriteImage(const Image& image, const std::filesystem::path& path);

// 8-bit grayscale PNG of a field assumed to be in [0,1] (clamped).
void WriteGrayPng(const Field& field, const std::filesystem::path& path);
// Reads an 8-bit PNG as a single [0,1] plane (luma of RGB input).
Field ReadGrayPng(const std::filesystem::path& path);

// Raw heatmap sidecar:
//   "HMAP" | u8 version=1 | u32le width | u32le height | f32le[w*h] row-major
inline constexpr std::uint8_t kHeatmapVersion = 1;
std::vector<std::uint8_t> EncodeHeatmap(const Field& field);
Field DecodeHeatmap(const std::vector<std::uint8_t>& bytes);
void WriteHeatmapRaw(const Field& field, const std::filesystem::path& path);
Field ReadHeatmapRaw(const std::filesystem::path& path);

// Writes the min-max normalized grayscale PNG and the raw sidecar.
void WriteHeatmap(const AttributionMap& map,
                  const std::filesystem::path& png_path,
                  const std::filesystem::path& raw_path);

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::vector<std::uint8_t>& bytes,
                    const std::filesystem::path& path);

}  // namespace attrib

#endif  // ATTRIB_IMAGE_IO_H_
