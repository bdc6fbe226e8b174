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

#include "attrib/image_io.h"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "attrib/error.h"

namespace attrib {
namespace {

std::uint8_t ToByte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

struct DecodedPng {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<std::uint8_t> bytes;
};

DecodedPng DecodePng(const std::filesystem::path& path, bool want_gray) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw IoError("cannot read PNG '" + path.string() + "': " + img.message);
  }
  if (img.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&img);
    throw IoError("'" + path.string() + "' is not an 8-bit PNG");
  }
  if (img.format & PNG_FORMAT_FLAG_ALPHA) {
    png_image_free(&img);
    throw IoError("'" + path.string() + "' has an alpha channel");
  }
  constexpr std::uint64_t kMaxPixels = 1ULL << 28;
  if (static_cast<std::uint64_t>(img.width) * img.height > kMaxPixels) {
    png_image_free(&img);
    throw IoError("'" + path.string() + "' dimensions overflow");
  }
  DecodedPng out;
  out.width = static_cast<int>(img.width);
  out.height = static_cast<int>(img.height);
  out.channels = want_gray ? 1 : 3;
  img.format = want_gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  out.bytes.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.bytes.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw IoError("cannot decode PNG '" + path.string() + "': " + msg);
  }
  return out;
}

void EncodePng(const std::vector<std::uint8_t>& bytes, int height, int width,
               bool gray, const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    throw IoError("cannot write PNG '" + path.string() + "': " + img.message);
  }
}

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t GetU32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

Image ReadImage(const std::filesystem::path& path) {
  DecodedPng png = DecodePng(path, false);
  Image out(png.height, png.width);
  for (std::size_t i = 0; i < png.bytes.size(); ++i) out[i] = png.bytes[i] / 255.0;
  return out;
}

void WriteImage(const Image& image, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes(image.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = ToByte(image[i]);
  EncodePng(bytes, image.height(), image.width(), false, path);
}

void WriteGrayPng(const Field& field, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes(field.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = ToByte(field[i]);
  EncodePng(bytes, field.height(), field.width(), true, path);
}

Field ReadGrayPng(const std::filesystem::path& path) {
  DecodedPng png = DecodePng(path, true);
  Field out(png.height, png.width);
  for (std::size_t i = 0; i < png.bytes.size(); ++i) out[i] = png.bytes[i] / 255.0;
  return out;
}

std::vector<std::uint8_t> EncodeHeatmap(const Field& field) {
  static_assert(std::numeric_limits<float>::is_iec559);
  std::vector<std::uint8_t> out;
  out.reserve(13 + field.size() * 4);
  out.insert(out.end(), {'H', 'M', 'A', 'P', kHeatmapVersion});
  PutU32(out, static_cast<std::uint32_t>(field.width()));
  PutU32(out, static_cast<std::uint32_t>(field.height()));
  for (double v : field.values()) {
    PutU32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

Field DecodeHeatmap(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 13 || std::memcmp(bytes.data(), "HMAP", 4) != 0) {
    throw IoError("not a HMAP heatmap (bad magic)");
  }
  if (bytes[4] != kHeatmapVersion) {
    throw IoError("unsupported HMAP version " + std::to_string(bytes[4]));
  }
  const std::uint32_t w = GetU32(bytes.data() + 5);
  const std::uint32_t h = GetU32(bytes.data() + 9);
  const std::uint64_t n = static_cast<std::uint64_t>(w) * h;
  if (n > (1ULL << 28) || bytes.size() != 13 + n * 4) {
    throw IoError("HMAP payload size does not match its header");
  }
  Field out(static_cast<int>(h), static_cast<int>(w));
  for (std::uint64_t i = 0; i < n; ++i) {
    out[i] = std::bit_cast<float>(GetU32(bytes.data() + 13 + 4 * i));
  }
  return out;
}

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void WriteFileBytes(const std::vector<std::uint8_t>& bytes,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to '" + path.string() + "'");
}

void WriteHeatmapRaw(const Field& field, const std::filesystem::path& path) {
  WriteFileBytes(EncodeHeatmap(field), path);
}

Field ReadHeatmapRaw(const std::filesystem::path& path) {
  return DecodeHeatmap(ReadFileBytes(path));
}

void WriteHeatmap(const AttributionMap& map, const std::filesystem::path& png_path,
                  const std::filesystem::path& raw_path) {
  WriteGrayPng(map.MinMaxNormalized(), png_path);
  WriteHeatmapRaw(map.values(), raw_path);
}

}  // namespace attrib
