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

#include "modellock/shapeset.h"

#include <map>

#include "doctest.h"
#include "modellock/error.h"
#include "modellock/evaluator.h"
#include "modellock/hashing.h"
#include "modellock/trainer.h"
#include "test_util.h"

namespace modellock {
namespace {

TEST_CASE("ShapeSetTest.Deterministic") {
  ShapeSetSpec s;
  s.train_count = 60;
  s.test_count = 30;
  const ShapeSet a = GenerateShapeSet(s), b = GenerateShapeSet(s);
  CHECK_EQ(DatasetDigest(a.train), DatasetDigest(b.train));
  CHECK_EQ(DatasetDigest(a.test), DatasetDigest(b.test));
  s.seed = 2;
  CHECK_NE(DatasetDigest(GenerateShapeSet(s).train), DatasetDigest(a.train));
}

TEST_CASE("ShapeSetTest.BalancedAndDisjointIds") {
  ShapeSetSpec s;
  s.num_classes = 4;
  s.train_count = 101;
  s.test_count = 40;
  const ShapeSet d = GenerateShapeSet(s);
  std::map<std::uint32_t, int> counts;
  for (const Sample& x : d.train.samples) counts[std::get<ClassId>(x.label).value]++;
  REQUIRE_EQ(counts.size(), 4u);
  for (const auto& [cls, n] : counts) CHECK((n == 25 || n == 26));
  CHECK_EQ(d.test.samples.front().id, 101u);
}

TEST_CASE("ShapeSetTest.AllTasksValidate") {
  for (TaskKind t : {TaskKind::kClassification, TaskKind::kMultiLabel, TaskKind::kSegmentation}) {
    const ShapeSet d = testing::SmallShapeSet(t, 40, 40, 16);
    CHECK_NOTHROW(ValidateDataset(d.train, d.train.num_classes));
  }
  const ShapeSet seg = testing::SmallShapeSet(TaskKind::kSegmentation, 10, 30, 16);
  CHECK_EQ(seg.train.num_classes, 4u);  // three shapes plus background
}

TEST_CASE("ShapeSetTest.SpecValidationAndJson") {
  ShapeSetSpec s;
  s.height = 4;
  EXPECT_ERROR_CODE(ValidateShapeSetSpec(s), ErrorCode::kConfig);
  s = {};
  s.num_classes = kNumShapeKinds + 1;
  EXPECT_ERROR_CODE(ValidateShapeSetSpec(s), ErrorCode::kConfig);
  s = {};
  s.noise = 0.1f;
  s.seed = 9;
  const ShapeSetSpec back = ShapeSetSpec::FromJson(s.ToJson());
  CHECK_EQ(back.noise, 0.1f);
  CHECK_EQ(back.seed, 9u);
  EXPECT_ERROR_CODE(ShapeSetSpec::FromJson({{"train", 10}}), ErrorCode::kConfig);
}

TEST_CASE("ShapeSetTest.CoverageIsAFraction") {
  for (int k = 0; k < kNumShapeKinds; ++k) {
    const auto kind = static_cast<ShapeKind>(k);
    for (int x = 0; x < 32; x += 3) {
      const float v = ShapeCoverage(kind, 16, 16, 6, x, 16);
      CHECK((v >= 0.0f && v <= 1.0f));
    }
    CHECK_EQ(ShapeCoverage(kind, 16, 16, 6, 0, 0), 0.0f);
  }
  CHECK_EQ(ShapeCoverage(ShapeKind::kDisc, 16, 16, 6, 16, 16), 1.0f);
  // A ring is hollow.
  CHECK_EQ(ShapeCoverage(ShapeKind::kRing, 16.5, 16.5, 8, 16, 16), 0.0f);
}

// Clean baselines pin the difficulty of the default benchmark.
TEST_CASE("ShapeSetTest.Baselines") {
  const ShapeSet d = GenerateShapeSet(ShapeSetSpec{});
  ModelSpec spec;
  spec.output_classes = 3;
  spec.init_seed = 1;
  TrainConfig cfg;
  cfg.shuffle_seed = 2;
  spec.arch = Arch::kLinear;
  const double linear = Accuracy(Train(InitModel(spec), d.train, cfg).model, d.test);
  spec.arch = Arch::kMlp;
  const double mlp = Accuracy(Train(InitModel(spec), d.train, cfg).model, d.test);
  MESSAGE("linear " << linear << ", mlp " << mlp);
  CHECK(linear >= 0.90);
  CHECK(mlp >= 0.95);
}

}  // namespace
}  // namespace modellock
