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

// MLTD dataset container. Layout, all integers little-endian:
//
//   "MLTD" | version u16 | task u8 | num_classes u32 | count u64
//   per sample:
//     id u64 | flags u8 (bit0 edited, bit1 relabeled) | H u32 | W u32 | C u8
//     label tag u8, then
//       0 ClassId:   value u32
//       1 MultiLabel: L u32, ceil(L/8) bytes, bit i at byte i/8, bit i%8
//       2 SegMask:   H u32, W u32, H*W u16 cells
//     H*W*C f32 pixels
//   CRC-32 u32 of every byte after the magic.

#ifndef MODELLOCK_MLTD_H_
#define MODELLOCK_MLTD_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "modellock/tensor.h"

namespace modellock {

inline constexpr std::uint16_t kMltdVersion = 1;

std::vector<std::uint8_t> EncodeDataset(const Dataset& dataset);
// Throws Error with kFormat, kTruncated or kChecksum.
Dataset DecodeDataset(std::span<const std::uint8_t> bytes);

void SaveDataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset LoadDataset(const std::filesystem::path& path);

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const std::uint8_t> bytes);

}  // namespace modellock

#endif  // MODELLOCK_MLTD_H_
