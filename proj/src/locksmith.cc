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

#include "modellock/locksmith.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <utility>

#include "modellock/error.h"
#include "modellock/hashing.h"

namespace modellock {
namespace {

constexpr std::uint64_t kPartitionStream = 0x9A27171ULL;

}  // namespace

nlohmann::json LockReport::ToJson() const {
  return {{"total", total},
          {"edited", edited},
          {"relabeled", relabeled},
          {"alpha", alpha},
          {"gamma", gamma},
          {"transform", transform},
          {"transform_digest", HexDigest(transform_digest)},
          {"dataset_digest", HexDigest(dataset_digest)}};
}

std::size_t EditedCount(std::size_t n, float alpha) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(alpha) * n + 0.5));
}

void CheckLockable(std::size_t n, float alpha) {
  if (!(alpha > 0.0f && alpha < 1.0f)) {
    throw Error(ErrorCode::kConfig, "locking impossible: alpha must lie in (0, 1), got " +
                                        std::to_string(alpha));
  }
  const std::size_t edited = EditedCount(n, alpha);
  if (edited < 1 || n - edited < 1) {
    throw Error(ErrorCode::kConfig,
                "locking impossible: alpha=" + std::to_string(alpha) + " with N=" +
                    std::to_string(n) + " leaves an empty edited or locking subset");
  }
}

Partition PartitionDataset(const Dataset& dataset, float alpha, std::uint64_t seed) {
  CheckLockable(dataset.size(), alpha);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> ranked;
  ranked.reserve(dataset.size());
  for (const Sample& s : dataset.samples) {
    ranked.emplace_back(MixSeed(MixSeed(seed, kPartitionStream), s.id), s.id);
  }
  std::sort(ranked.begin(), ranked.end());
  const std::size_t m = EditedCount(dataset.size(), alpha);
  Partition p;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    (i < m ? p.edited_ids : p.relabeled_ids).push_back(ranked[i].second);
  }
  std::sort(p.edited_ids.begin(), p.edited_ids.end());
  std::sort(p.relabeled_ids.begin(), p.relabeled_ids.end());
  return p;
}

PixelRect LockRectangle(int height, int width) {
  const int rw = width / 2, rh = height / 2;
  PixelRect r;
  r.x0 = (width - rw) / 2;
  r.y0 = (height - rh) / 2;
  r.x1 = r.x0 + rw;
  r.y1 = r.y0 + rh;
  return r;
}

Label ModifyLabel(const Label& label, TaskKind task, std::uint32_t num_classes,
                  const LockLabelPolicy& policy) {
  switch (task) {
    case TaskKind::kClassification:
      if (!std::holds_alternative<ClassId>(label)) {
        throw Error(ErrorCode::kTaskMismatch, "classification task needs a class label");
      }
      return ClassId{num_classes};
    case TaskKind::kMultiLabel: {
      const auto* m = std::get_if<MultiLabel>(&label);
      if (m == nullptr) throw Error(ErrorCode::kTaskMismatch, "multi-label task needs bits");
      MultiLabel out = *m;
      if (policy.multilabel == MultiLabelLockPolicy::kClearAndFlag) {
        std::fill(out.bits.begin(), out.bits.end(), false);
      }
      out.bits.push_back(true);
      return out;
    }
    case TaskKind::kSegmentation: {
      const auto* m = std::get_if<SegMask>(&label);
      if (m == nullptr) throw Error(ErrorCode::kTaskMismatch, "segmentation task needs a mask");
      SegMask out{m->height, m->width, std::vector<std::uint16_t>(m->cells.size(), 0)};
      const PixelRect r = LockRectangle(m->height, m->width);
      for (int y = r.y0; y < r.y1; ++y) {
        for (int x = r.x0; x < r.x1; ++x) {
          out.cells[static_cast<std::size_t>(y) * m->width + x] =
              static_cast<std::uint16_t>(num_classes);
        }
      }
      return out;
    }
  }
  throw Error(ErrorCode::kTaskMismatch, "unknown task");
}

std::uint64_t SampleSeed(std::uint64_t seed, std::uint64_t id) { return MixSeed(seed, id); }

LockedDataset LockWithTransform(const Dataset& dataset, const ImageTransform& transform,
                                float alpha, std::uint64_t seed,
                                const LockLabelPolicy& policy, std::string transform_name,
                                std::uint64_t transform_digest, float gamma) {
  if (dataset.samples.empty()) throw Error(ErrorCode::kConfig, "cannot lock an empty dataset");
  ValidateDataset(dataset, dataset.num_classes);
  if (IsLocked(dataset)) throw Error(ErrorCode::kConfig, "dataset is already locked");

  LockedDataset out;
  Partition part = PartitionDataset(dataset, alpha, seed);
  const std::unordered_set<std::uint64_t> edited(part.edited_ids.begin(), part.edited_ids.end());

  out.dataset.task = dataset.task;
  out.dataset.num_classes = dataset.num_classes + 1;
  out.dataset.samples.reserve(dataset.size());
  for (const Sample& s : dataset.samples) {
    Sample t;
    t.id = s.id;
    if (edited.count(s.id) != 0) {
      t.image = transform(s.image, SampleSeed(seed, s.id));
      t.label = s.label;
      t.edited = true;
    } else {
      t.image = s.image;
      t.label = ModifyLabel(s.label, dataset.task, dataset.num_classes, policy);
      t.relabeled = true;
    }
    out.dataset.samples.push_back(std::move(t));
  }
  std::sort(out.dataset.samples.begin(), out.dataset.samples.end(),
            [](const Sample& a, const Sample& b) { return a.id < b.id; });

  out.edited_ids = std::move(part.edited_ids);
  out.relabeled_ids = std::move(part.relabeled_ids);
  out.report.total = dataset.size();
  out.report.edited = out.edited_ids.size();
  out.report.relabeled = out.relabeled_ids.size();
  out.report.alpha = alpha;
  out.report.gamma = gamma;
  out.report.transform = std::move(transform_name);
  out.report.transform_digest = transform_digest;
  out.report.dataset_digest = DatasetDigest(out.dataset);
  return out;
}

LockedDataset LockDataset(const Dataset& dataset, const LockConfig& cfg) {
  CheckLockable(dataset.size(), cfg.alpha);
  ValidateEditorConfig(cfg.editor);
  std::string name = "external";
  std::uint64_t digest = StableHash64(cfg.key.prompt());
  if (cfg.editor.kind == EditorKind::kProcedural) {
    const EditParams params = DeriveEditParams(cfg.key);
    name = std::string(FamilyName(params.family));
    digest = params.derivation_digest;
  }
  return LockWithTransform(dataset, MakeKeyedTransform(cfg.key, cfg.editor), cfg.alpha,
                           cfg.seed, cfg.policy, std::move(name), digest, cfg.gamma());
}

Dataset EditAll(const Dataset& dataset, const ImageTransform& transform, std::uint64_t seed) {
  Dataset out;
  out.task = dataset.task;
  out.num_classes = dataset.num_classes;
  out.samples.reserve(dataset.size());
  for (const Sample& s : dataset.samples) {
    Sample t = s;
    t.image = transform(s.image, SampleSeed(seed, s.id));
    out.samples.push_back(std::move(t));
  }
  return out;
}

bool IsLocked(const Dataset& dataset) {
  return std::any_of(dataset.samples.begin(), dataset.samples.end(),
                     [](const Sample& s) { return s.edited || s.relabeled; });
}

}  // namespace modellock
