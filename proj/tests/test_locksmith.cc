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
#include <map>
#include <random>

#include "doctest.h"
#include "modellock/error.h"
#include "modellock/hashing.h"
#include "test_util.h"

namespace modellock {
namespace {

using testing::SmallShapeSet;

Dataset Ids(std::size_t n) {
  Dataset d;
  d.num_classes = 2;
  for (std::size_t i = 0; i < n; ++i) d.samples.push_back({i, Image(1, 1, 1), ClassId{0}});
  return d;
}

TEST_CASE("PartitionTest.Counts") {
  const Partition p = PartitionDataset(Ids(100), 0.95f, 1);
  CHECK_EQ(p.edited_ids.size(), 95u);
  CHECK_EQ(p.relabeled_ids.size(), 5u);
  CHECK_EQ(EditedCount(10, 0.25f), 3u);  // 2.5 rounds up
  CHECK_EQ(EditedCount(200, 0.95f), 190u);
}

TEST_CASE("PartitionTest.DeterministicAndDisjoint") {
  const Partition a = PartitionDataset(Ids(40), 0.5f, 9);
  const Partition b = PartitionDataset(Ids(40), 0.5f, 9);
  CHECK(a.edited_ids == b.edited_ids);
  std::vector<std::uint64_t> both;
  std::set_intersection(a.edited_ids.begin(), a.edited_ids.end(), a.relabeled_ids.begin(),
                        a.relabeled_ids.end(), std::back_inserter(both));
  CHECK(both.empty());
  CHECK_EQ(a.edited_ids.size() + a.relabeled_ids.size(), 40u);
}

TEST_CASE("PartitionTest.UniformOverSeeds") {
  std::vector<int> hits(100, 0);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    for (std::uint64_t id : PartitionDataset(Ids(100), 0.95f, seed).edited_ids) ++hits[id];
  }
  for (int h : hits) {
    CHECK(std::abs(h / 1000.0 - 0.95) <= 0.03);
  }
}

TEST_CASE("PartitionTest.ImpossibleSplits") {
  EXPECT_ERROR_CODE(PartitionDataset(Ids(100), 1.0f, 0), ErrorCode::kConfig);
  EXPECT_ERROR_CODE(PartitionDataset(Ids(100), 0.0f, 0), ErrorCode::kConfig);
  EXPECT_ERROR_CODE(PartitionDataset(Ids(10), 0.99f, 0), ErrorCode::kConfig);
}

TEST_CASE("ModifyLabelTest.Classification") {
  CHECK(std::get<ClassId>(ModifyLabel(ClassId{3}, TaskKind::kClassification, 10)) == ClassId{10});
}

TEST_CASE("ModifyLabelTest.MultiLabelPolicies") {
  const MultiLabel y{{true, false, true, false}};
  CHECK(std::get<MultiLabel>(ModifyLabel(y, TaskKind::kMultiLabel, 4)).bits ==
        std::vector<bool>{false, false, false, false, true});
  LockLabelPolicy keep;
  keep.multilabel = MultiLabelLockPolicy::kKeepAndFlag;
  CHECK(std::get<MultiLabel>(ModifyLabel(y, TaskKind::kMultiLabel, 4, keep)).bits ==
        std::vector<bool>{true, false, true, false, true});
}

TEST_CASE("ModifyLabelTest.SegmentationCenteredRectangle") {
  const SegMask m{32, 32, std::vector<std::uint16_t>(32 * 32, 1)};
  const SegMask out = std::get<SegMask>(ModifyLabel(m, TaskKind::kSegmentation, 4));
  int lock = 0, other = 0;
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      const bool center = x >= 8 && x < 24 && y >= 8 && y < 24;
      CHECK_EQ(out.at(y, x), center ? 4 : 0);
      (out.at(y, x) == 4 ? lock : other)++;
    }
  }
  CHECK_EQ(lock, 256);
  const PixelRect odd = LockRectangle(7, 9);
  CHECK_EQ(odd.x1 - odd.x0, 4);
  CHECK_EQ(odd.y1 - odd.y0, 3);
  CHECK_EQ(odd.x0, 2);
  CHECK_EQ(odd.y0, 2);
}

TEST_CASE("ModifyLabelTest.TaskMismatch") {
  EXPECT_ERROR_CODE(ModifyLabel(ClassId{1}, TaskKind::kMultiLabel, 3), ErrorCode::kTaskMismatch);
}

LockConfig TestLock(float alpha = 0.95f) {
  LockConfig cfg;
  cfg.alpha = alpha;
  cfg.key = EditKey("with oil pastel", "demo-lock");
  cfg.seed = 17;
  return cfg;
}

TEST_CASE("LockDatasetTest.Invariants") {
  const Dataset d = SmallShapeSet(TaskKind::kClassification, 200, 30).train;
  const LockedDataset l = LockDataset(d, TestLock());
  CHECK_EQ(l.dataset.num_classes, d.num_classes + 1);
  CHECK_EQ(l.edited_ids.size(), 190u);
  CHECK_EQ(l.relabeled_ids.size(), 10u);
  CHECK_EQ(l.report.edited, 190u);
  CHECK_EQ(l.report.transform, "TextureOverlay");
  CHECK_EQ(l.report.dataset_digest, DatasetDigest(l.dataset));
  std::size_t relabeled = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Sample& before = d.samples[i];
    const Sample& after = l.dataset.samples[i];
    REQUIRE_EQ(before.id, after.id);
    CHECK(after.edited != after.relabeled);
    if (after.edited) {
      CHECK(after.label == before.label);
      CHECK_NE(ImageDigest(after.image), ImageDigest(before.image));
    } else {
      ++relabeled;
      CHECK(std::get<ClassId>(after.label) == ClassId{d.num_classes});
      CHECK_EQ(ImageDigest(after.image), ImageDigest(before.image));
    }
  }
  CHECK_EQ(relabeled, 10u);
  CHECK(IsLocked(l.dataset));
  CHECK_FALSE(IsLocked(d));
}

TEST_CASE("LockDatasetTest.Deterministic") {
  const Dataset d = SmallShapeSet(TaskKind::kClassification, 60, 30).train;
  CHECK_EQ(LockDataset(d, TestLock()).report.dataset_digest,
           LockDataset(d, TestLock()).report.dataset_digest);
}

TEST_CASE("LockDatasetTest.OrderDoesNotMatter") {
  const Dataset d = SmallShapeSet(TaskKind::kClassification, 60, 30).train;
  Dataset shuffled = d;
  std::mt19937 rng(5);
  std::shuffle(shuffled.samples.begin(), shuffled.samples.end(), rng);
  CHECK_EQ(LockDataset(d, TestLock()).report.dataset_digest,
           LockDataset(shuffled, TestLock()).report.dataset_digest);
  const auto t = MakeKeyedTransform(TestLock().key, EditorConfig{});
  std::map<std::uint64_t, std::uint64_t> by_id;
  for (const Sample& s : EditAll(d, t, 3).samples) by_id[s.id] = ImageDigest(s.image);
  for (const Sample& s : EditAll(shuffled, t, 3).samples) CHECK_EQ(by_id[s.id], ImageDigest(s.image));
}

TEST_CASE("LockDatasetTest.MultiLabelAndSegmentation") {
  const Dataset ml = SmallShapeSet(TaskKind::kMultiLabel, 80, 40).train;
  const LockedDataset lm = LockDataset(ml, TestLock(0.9f));
  for (const Sample& s : lm.dataset.samples) {
    const auto& bits = std::get<MultiLabel>(s.label).bits;
    CHECK_EQ(bits.size(), s.relabeled ? ml.num_classes + 1 : ml.num_classes);
  }
  CHECK_NOTHROW(ValidateDataset(lm.dataset, lm.dataset.num_classes));

  const Dataset seg = SmallShapeSet(TaskKind::kSegmentation, 40, 30).train;
  const LockedDataset ls = LockDataset(seg, TestLock(0.9f));
  CHECK_NOTHROW(ValidateDataset(ls.dataset, ls.dataset.num_classes));
}

TEST_CASE("LockDatasetTest.Rejections") {
  const Dataset d = SmallShapeSet(TaskKind::kClassification, 30, 30).train;
  EXPECT_ERROR_CODE(LockDataset(d, TestLock(1.0f)), ErrorCode::kConfig);
  EXPECT_ERROR_CODE(LockDataset(Dataset{}, TestLock()), ErrorCode::kConfig);
  const LockedDataset once = LockDataset(d, TestLock());
  EXPECT_ERROR_CODE(LockDataset(once.dataset, TestLock()), ErrorCode::kConfig);
}

}  // namespace
}  // namespace modellock
