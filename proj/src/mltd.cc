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

#include "modellock/mltd.h"

#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <variant>

#include "byte_io.h"
#include "modellock/error.h"
#include "modellock/hashing.h"

namespace modellock {
namespace {

constexpr char kMagic[4] = {'M', 'L', 'T', 'D'};

void EncodeLabel(const Label& label, internal::ByteWriter& w) {
  std::visit(
      [&w](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, ClassId>) {
          w.Put<std::uint8_t>(0);
          w.Put<std::uint32_t>(l.value);
        } else if constexpr (std::is_same_v<T, MultiLabel>) {
          w.Put<std::uint8_t>(1);
          w.Put<std::uint32_t>(static_cast<std::uint32_t>(l.bits.size()));
          std::vector<std::uint8_t> packed((l.bits.size() + 7) / 8, 0);
          for (std::size_t i = 0; i < l.bits.size(); ++i) {
            if (l.bits[i]) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
          }
          w.PutBytes(packed);
        } else {
          w.Put<std::uint8_t>(2);
          w.Put<std::uint32_t>(static_cast<std::uint32_t>(l.height));
          w.Put<std::uint32_t>(static_cast<std::uint32_t>(l.width));
          for (auto c : l.cells) w.Put<std::uint16_t>(c);
        }
      },
      label);
}

Label DecodeLabel(internal::ByteReader& r) {
  const auto tag = r.Get<std::uint8_t>();
  switch (tag) {
    case 0:
      return ClassId{r.Get<std::uint32_t>()};
    case 1: {
      const auto n = r.Get<std::uint32_t>();
      auto packed = r.GetBytes((static_cast<std::size_t>(n) + 7) / 8);
      MultiLabel m;
      m.bits.resize(n);
      for (std::size_t i = 0; i < n; ++i) m.bits[i] = (packed[i / 8] >> (i % 8)) & 1u;
      return m;
    }
    case 2: {
      SegMask m;
      m.height = static_cast<int>(r.Get<std::uint32_t>());
      m.width = static_cast<int>(r.Get<std::uint32_t>());
      const std::size_t n = static_cast<std::size_t>(m.height) * m.width;
      if (n > r.remaining() / 2) r.GetBytes(n * 2);  // throws kTruncated
      m.cells.resize(n);
      for (auto& c : m.cells) c = r.Get<std::uint16_t>();
      return m;
    }
    default:
      throw Error(ErrorCode::kFormat, "unknown label tag " + std::to_string(tag));
  }
}

}  // namespace

std::vector<std::uint8_t> EncodeDataset(const Dataset& dataset) {
  internal::ByteWriter w;
  for (char c : kMagic) w.Put<char>(c);
  w.Put<std::uint16_t>(kMltdVersion);
  w.Put<std::uint8_t>(static_cast<std::uint8_t>(dataset.task));
  w.Put<std::uint32_t>(dataset.num_classes);
  w.Put<std::uint64_t>(dataset.samples.size());
  for (const Sample& s : dataset.samples) {
    w.Put<std::uint64_t>(s.id);
    w.Put<std::uint8_t>((s.edited ? 1 : 0) | (s.relabeled ? 2 : 0));
    w.Put<std::uint32_t>(static_cast<std::uint32_t>(s.image.height()));
    w.Put<std::uint32_t>(static_cast<std::uint32_t>(s.image.width()));
    w.Put<std::uint8_t>(static_cast<std::uint8_t>(s.image.channels()));
    EncodeLabel(s.label, w);
    w.PutFloats(s.image.data());
  }
  auto& bytes = w.bytes();
  const std::uint32_t crc =
      Crc32(std::span<const std::uint8_t>(bytes).subspan(sizeof(kMagic)));
  w.Put<std::uint32_t>(crc);
  return std::move(w.bytes());
}

namespace {

// Parses header and samples; returns the dataset and the number of bytes
// consumed after the magic.
std::pair<Dataset, std::size_t> ParseBody(std::span<const std::uint8_t> body) {
  internal::ByteReader r(body);
  const auto version = r.Get<std::uint16_t>();
  if (version != kMltdVersion) {
    throw Error(ErrorCode::kFormat, "unsupported MLTD version " + std::to_string(version));
  }
  const auto task_tag = r.Get<std::uint8_t>();
  if (task_tag > 2) {
    throw Error(ErrorCode::kFormat, "unknown task tag " + std::to_string(task_tag));
  }
  Dataset dataset;
  dataset.task = static_cast<TaskKind>(task_tag);
  dataset.num_classes = r.Get<std::uint32_t>();
  const auto count = r.Get<std::uint64_t>();
  // Every sample needs at least 24 bytes; reject absurd counts before
  // reserving.
  if (count > r.remaining() / 24) {
    throw Error(ErrorCode::kTruncated, "sample count exceeds payload");
  }
  dataset.samples.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Sample s;
    s.id = r.Get<std::uint64_t>();
    const auto flags = r.Get<std::uint8_t>();
    if (flags > 3) throw Error(ErrorCode::kFormat, "unknown sample flags");
    s.edited = flags & 1;
    s.relabeled = flags & 2;
    const int h = static_cast<int>(r.Get<std::uint32_t>());
    const int w = static_cast<int>(r.Get<std::uint32_t>());
    const int c = r.Get<std::uint8_t>();
    s.label = DecodeLabel(r);
    if (h <= 0 || w <= 0 || (c != 1 && c != 3)) {
      throw Error(ErrorCode::kFormat, "bad image dimensions");
    }
    auto pixels = r.GetFloats(static_cast<std::size_t>(h) * w * c);
    try {
      s.image = Image(h, w, c, std::move(pixels));
    } catch (const Error& e) {
      throw Error(ErrorCode::kFormat, std::string("invalid pixel payload: ") + e.what());
    }
    dataset.samples.push_back(std::move(s));
  }
  return {std::move(dataset), r.position()};
}

}  // namespace

Dataset DecodeDataset(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kMagic) ||
      !std::equal(kMagic, kMagic + 4, bytes.begin(),
                  [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; })) {
    throw Error(ErrorCode::kFormat, "bad magic, not an MLTD file");
  }
  const auto rest = bytes.subspan(sizeof(kMagic));
  if (rest.size() >= sizeof(std::uint16_t)) {
    internal::ByteReader head(rest.first(sizeof(std::uint16_t)));
    const auto version = head.Get<std::uint16_t>();
    if (version != kMltdVersion) {
      throw Error(ErrorCode::kFormat, "unsupported MLTD version " + std::to_string(version));
    }
  }
  bool crc_ok = false;
  if (rest.size() >= sizeof(std::uint32_t)) {
    const auto body = rest.first(rest.size() - sizeof(std::uint32_t));
    internal::ByteReader tail(rest.last(sizeof(std::uint32_t)));
    crc_ok = tail.Get<std::uint32_t>() == Crc32(body);
  }
  if (!crc_ok) {
    // A short file fails the CRC too; report it as truncation when the
    // structure runs out before the declared content does, and as a format
    // error when a valid file is followed by extra bytes.
    std::optional<Error> diagnosis;
    try {
      const std::size_t used = ParseBody(rest).second;
      if (used + sizeof(std::uint32_t) > rest.size()) {
        diagnosis = Error(ErrorCode::kTruncated, "missing checksum");
      } else {
        internal::ByteReader tail(rest.subspan(used, sizeof(std::uint32_t)));
        if (tail.Get<std::uint32_t>() == Crc32(rest.first(used))) {
          diagnosis = Error(ErrorCode::kFormat, "trailing bytes after samples");
        }
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kTruncated) diagnosis = e;
    }
    if (diagnosis) throw *diagnosis;
    throw Error(ErrorCode::kChecksum, "CRC-32 mismatch");
  }
  auto [dataset, used] = ParseBody(rest.first(rest.size() - sizeof(std::uint32_t)));
  if (used + sizeof(std::uint32_t) != rest.size()) {
    throw Error(ErrorCode::kFormat, "trailing bytes after samples");
  }
  return dataset;
}

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

void SaveDataset(const Dataset& dataset, const std::filesystem::path& path) {
  WriteFileBytes(path, EncodeDataset(dataset));
}

Dataset LoadDataset(const std::filesystem::path& path) {
  return DecodeDataset(ReadFileBytes(path));
}

}  // namespace modellock
