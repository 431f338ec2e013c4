/* Copyright 2026 The ModelLock Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef MODELLOCK_HASHING_H_
#define MODELLOCK_HASHING_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "modellock/tensor.h"

namespace modellock {

// 64-bit FNV-1a. Identical on every platform.
std::uint64_t StableHash64(std::span<const std::uint8_t> bytes);
std::uint64_t StableHash64(std::string_view text);

// Digest of dimensions (u32 LE each) followed by the raw f32 payload.
std::uint64_t ImageDigest(const Image& image);

// Order-sensitive digest over every sample (id, flags, label, image digest).
std::uint64_t DatasetDigest(const Dataset& dataset);

// IEEE CRC-32 as used by zlib/PNG.
std::uint32_t Crc32(std::span<const std::uint8_t> bytes);

std::string HexDigest(std::uint64_t digest);

constexpr std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Combines two 64-bit keys into one seed; used for (global_seed, sample id).
constexpr std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b) {
  return SplitMix64(SplitMix64(a) ^ (b * 0xD6E8FEB86659FD93ULL));
}

// Counter-based generator: value i depends only on (seed, i), never on call
// order.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) : seed_(seed) {}

  constexpr std::uint64_t Bits(std::uint64_t counter) const {
    return SplitMix64(seed_ ^ SplitMix64(counter));
  }
  // Uniform double in [0, 1) from the top 53 bits.
  constexpr double Uniform(std::uint64_t counter) const {
    return static_cast<double>(Bits(counter) >> 11) * 0x1.0p-53;
  }
  constexpr double Uniform(std::uint64_t counter, double lo, double hi) const {
    return lo + (hi - lo) * Uniform(counter);
  }
  // Uniform integer in [0, n).
  constexpr std::uint64_t Below(std::uint64_t counter, std::uint64_t n) const {
    return Bits(counter) % n;
  }

 private:
  std::uint64_t seed_;
};

}  // namespace modellock

#endif  // MODELLOCK_HASHING_H_
