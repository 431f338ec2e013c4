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

#include "modellock/hashing.h"

#include <zlib.h>

#include <cstdio>
#include <variant>

#include "byte_io.h"
#include "modellock/error.h"

namespace modellock {
namespace {

constexpr std::uint64_t kFnvOffsetBasis = 0xCBF29CE484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001B3ULL;

}  // namespace

std::uint64_t StableHash64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = kFnvOffsetBasis;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t StableHash64(std::string_view text) {
  return StableHash64(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::uint64_t ImageDigest(const Image& image) {
  internal::ByteWriter w;
  w.Put<std::uint32_t>(image.height());
  w.Put<std::uint32_t>(image.width());
  w.Put<std::uint32_t>(image.channels());
  w.PutFloats(image.data());
  return StableHash64(w.bytes());
}

std::uint64_t DatasetDigest(const Dataset& dataset) {
  internal::ByteWriter w;
  w.Put<std::uint8_t>(static_cast<std::uint8_t>(dataset.task));
  w.Put<std::uint32_t>(dataset.num_classes);
  for (const Sample& s : dataset.samples) {
    w.Put<std::uint64_t>(s.id);
    w.Put<std::uint8_t>((s.edited ? 1 : 0) | (s.relabeled ? 2 : 0));
    w.Put<std::uint64_t>(ImageDigest(s.image));
    std::visit(
        [&w](const auto& label) {
          using T = std::decay_t<decltype(label)>;
          if constexpr (std::is_same_v<T, ClassId>) {
            w.Put<std::uint8_t>(0);
            w.Put<std::uint32_t>(label.value);
          } else if constexpr (std::is_same_v<T, MultiLabel>) {
            w.Put<std::uint8_t>(1);
            for (bool b : label.bits) w.Put<std::uint8_t>(b ? 1 : 0);
          } else {
            w.Put<std::uint8_t>(2);
            for (auto c : label.cells) w.Put<std::uint16_t>(c);
          }
        },
        s.label);
  }
  return StableHash64(w.bytes());
}

std::uint32_t Crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - pos, 1u << 30);
    crc = crc32(crc, bytes.data() + pos, static_cast<uInt>(n));
    pos += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string HexDigest(std::uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

}  // namespace modellock
