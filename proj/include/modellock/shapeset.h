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

// Procedural "ShapeSet" benchmark: antialiased geometric shapes with random
// position, scale and color over a neutral background, plus Gaussian noise.

#ifndef MODELLOCK_SHAPESET_H_
#define MODELLOCK_SHAPESET_H_

#include <cstdint>
#include <utility>

#include "json.hpp"
#include "modellock/tensor.h"

namespace modellock {

enum class ShapeKind { kDisc, kSquare, kTriangle, kCross, kRing, kDiamond };
inline constexpr int kNumShapeKinds = 6;

struct ShapeSetSpec {
  TaskKind task = TaskKind::kClassification;
  // Shape classes for classification/segmentation (segmentation adds a
  // background class on top); label bits for multi-label.
  int num_classes = 3;
  int height = 32;
  int width = 32;
  int channels = 3;
  int train_count = 3000;
  int test_count = 600;
  float noise = 0.05f;
  std::uint64_t seed = 1;

  nlohmann::json ToJson() const;
  static ShapeSetSpec FromJson(const nlohmann::json& doc);
};

void ValidateShapeSetSpec(const ShapeSetSpec& spec);

struct ShapeSet {
  Dataset train;
  Dataset test;
};

// Train ids are 0..train_count-1 and test ids continue after them, so the two
// splits never share an id. Classes cycle with the id, which keeps every
// class within one sample of balanced.
ShapeSet GenerateShapeSet(const ShapeSetSpec& spec);

// Fractional coverage of `kind` at pixel (x, y) for a shape centered at
// (cx, cy) with half-extent r, using 4x4 supersampling.
float ShapeCoverage(ShapeKind kind, double cx, double cy, double r, int x, int y);

}  // namespace modellock

#endif  // MODELLOCK_SHAPESET_H_
