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

#include "doctest.h"

#include "modellock/error.h"
#include "modellock/hashing.h"
#include "test_util.h"

namespace modellock {
namespace {

using testing::SmallShapeSet;

const TaskKind kAllTasks[] = {TaskKind::kClassification, TaskKind::kMultiLabel,
                              TaskKind::kSegmentation};

TEST_CASE("MltdRoundTrip.DecodeInvertsEncode") {
  for (TaskKind task : kAllTasks) {
    CAPTURE(TaskName(task));
    Dataset d = SmallShapeSet(task, 12, 3, 8).train;
    d.samples[1].edited = true;
    d.samples[2].relabeled = true;
    const Dataset back = DecodeDataset(EncodeDataset(d));
    CHECK(back == d);
    CHECK_EQ(DatasetDigest(back), DatasetDigest(d));
  }
}

TEST_CASE("MltdRoundTrip.FileRoundTrip") {
  const auto dir = testing::ScratchDir("mltd");
  for (TaskKind task : kAllTasks) {
    CAPTURE(TaskName(task));
    const Dataset d = SmallShapeSet(task, 6, 3, 8).test;
    SaveDataset(d, dir / "d.mltd");
    CHECK(LoadDataset(dir / "d.mltd") == d);
  }
}

class MltdCorruption {
 protected:
  std::vector<std::uint8_t> bytes_ =
      EncodeDataset(SmallShapeSet(TaskKind::kClassification, 4, 3, 8).train);
};

TEST_CASE_FIXTURE(MltdCorruption, "MltdCorruption.BadMagic") {
  bytes_[0] = 'X';
  EXPECT_ERROR_CODE(DecodeDataset(bytes_), ErrorCode::kFormat);
}

TEST_CASE_FIXTURE(MltdCorruption, "MltdCorruption.Truncated") {
  bytes_.resize(bytes_.size() / 2);
  EXPECT_ERROR_CODE(DecodeDataset(bytes_), ErrorCode::kTruncated);
}

TEST_CASE_FIXTURE(MltdCorruption, "MltdCorruption.FlippedPayloadByte") {
  bytes_[bytes_.size() - 12] ^= 0x01;
  EXPECT_ERROR_CODE(DecodeDataset(bytes_), ErrorCode::kChecksum);
}

TEST_CASE_FIXTURE(MltdCorruption, "MltdCorruption.TrailingBytes") {
  bytes_.push_back(0);
  EXPECT_ERROR_CODE(DecodeDataset(bytes_), ErrorCode::kFormat);
}

TEST_CASE_FIXTURE(MltdCorruption, "MltdCorruption.UnsupportedVersion") {
  bytes_[4] = 9;
  EXPECT_ERROR_CODE(DecodeDataset(bytes_), ErrorCode::kFormat);
}

TEST_CASE("MltdFileTest.MissingFileIsIoError") {
  EXPECT_ERROR_CODE(LoadDataset("/nonexistent/modellock/x.mltd"), ErrorCode::kIo);
}

}  // namespace
}  // namespace modellock
