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

// Turns a private dataset into the locked training set: a round(alpha * N)
// subset is edited with the key while keeping its labels, and the remaining
// samples keep their images but are relabeled to the lock class.

#ifndef MODELLOCK_LOCKSMITH_H_
#define MODELLOCK_LOCKSMITH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "modellock/editor.h"
#include "modellock/tensor.h"

namespace modellock {

enum class MultiLabelLockPolicy {
  // Append a lock bit set to 1 and clear every original positive.
  kClearAndFlag,
  // Append a lock bit set to 1 and keep the original positives.
  kKeepAndFlag,
};

struct LockLabelPolicy {
  MultiLabelLockPolicy multilabel = MultiLabelLockPolicy::kClearAndFlag;
};

struct LockConfig {
  float alpha = 0.95f;
  EditKey key{"with oil pastel"};
  // editor.gamma is the blending ratio.
  EditorConfig editor;
  std::uint64_t seed = 0;
  LockLabelPolicy policy;

  float gamma() const { return editor.gamma; }
};

struct Partition {
  std::vector<std::uint64_t> edited_ids;     // sorted
  std::vector<std::uint64_t> relabeled_ids;  // sorted
};

struct LockReport {
  std::size_t total = 0;
  std::size_t edited = 0;
  std::size_t relabeled = 0;
  float alpha = 0.0f;
  float gamma = 0.0f;
  std::string transform;  // edit family or trigger name
  std::uint64_t transform_digest = 0;
  std::uint64_t dataset_digest = 0;

  nlohmann::json ToJson() const;
};

struct LockedDataset {
  Dataset dataset;  // merged, sorted by id; num_classes includes the lock class
  std::vector<std::uint64_t> edited_ids;
  std::vector<std::uint64_t> relabeled_ids;
  LockReport report;
};

// round(alpha * n) with halves rounded up.
std::size_t EditedCount(std::size_t n, float alpha);

// Throws kConfig when either side of the split would be empty.
void CheckLockable(std::size_t n, float alpha);

// Uniform split without replacement: samples are ranked by a hash of
// (seed, id) and the lowest round(alpha * N) go to the edited side, so the
// result does not depend on sample order.
Partition PartitionDataset(const Dataset& dataset, float alpha, std::uint64_t seed);

// `num_classes` is the original count; the lock class/category id equals it.
Label ModifyLabel(const Label& label, TaskKind task, std::uint32_t num_classes,
                  const LockLabelPolicy& policy = {});

// Centered floor(W/2) x floor(H/2) rectangle used for segmentation locks.
PixelRect LockRectangle(int height, int width);

// Per-sample seed used for editing sample `id` under lock seed `seed`.
std::uint64_t SampleSeed(std::uint64_t seed, std::uint64_t id);

// Shared core: edits the chosen subset with `transform` (seeded per sample)
// and relabels the rest.
LockedDataset LockWithTransform(const Dataset& dataset, const ImageTransform& transform,
                                float alpha, std::uint64_t seed,
                                const LockLabelPolicy& policy, std::string transform_name,
                                std::uint64_t transform_digest, float gamma);

LockedDataset LockDataset(const Dataset& dataset, const LockConfig& cfg);

// Applies `transform` to every image (test-time unlocking), labels and ids
// untouched. Seeds come from (seed, id).
Dataset EditAll(const Dataset& dataset, const ImageTransform& transform, std::uint64_t seed);

// True when any sample carries an edited/relabeled flag.
bool IsLocked(const Dataset& dataset);

}  // namespace modellock

#endif  // MODELLOCK_LOCKSMITH_H_
