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

#ifndef ATTRIB_RANDOM_H_
#define ATTRIB_RANDOM_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace attrib {

// SplitMix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Counter-based stream: a pure function of (seed, index).
constexpr std::uint64_t CounterHash(std::uint64_t seed, std::uint64_t index) {
  return Mix64(Mix64(seed) ^ index);
}

// Top 24 bits mapped to [0,1).
constexpr double CounterUniform24(std::uint64_t seed, std::uint64_t index) {
  return static_cast<double>(CounterHash(seed, index) >> 40) * 0x1.0p-24;
}

// Top 53 bits mapped to [0,1).
constexpr double CounterUniform(std::uint64_t seed, std::uint64_t index) {
  return static_cast<double>(CounterHash(seed, index) >> 11) * 0x1.0p-53;
}

// Sequential generator. The engine is std::mt19937_64, whose output sequence
// is fixed by the standard; conversions to doubles and bounded integers are
// done here so results do not depend on the standard library vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0,1).
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform integer in [0, n), n > 0.
  std::uint64_t Below(std::uint64_t n);
  // Fisher-Yates shuffle.
  template <typename T>
  void Shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(Below(i));
      std::swap(items[i - 1], items[j]);
    }
  }
  // Standard normal (Box-Muller).
  double Normal();

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t Rng::Below(std::uint64_t n) {
  // Rejection sampling keeps the distribution exactly uniform.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

inline double Rng::Normal() {
  const double u1 = 1.0 - Uniform();
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace attrib

#endif  // ATTRIB_RANDOM_H_
