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

// Small fixtures shared by the unit tests.

#ifndef MODELLOCK_TESTS_TEST_UTIL_H_
#define MODELLOCK_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"

#include "modellock/error.h"
#include "modellock/hashing.h"
#include "modellock/shapeset.h"
#include "modellock/tensor.h"

namespace modellock::testing {

// Image with deterministic pseudo-random pixels in [0, 1].
inline Image RandomImage(int h, int w, int c, std::uint64_t seed) {
  const CounterRng rng(seed);
  std::vector<float> data(static_cast<std::size_t>(h) * w * c);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(rng.Uniform(i));
  return Image(h, w, c, std::move(data));
}

inline ShapeSet SmallShapeSet(TaskKind task, int train, int test, int side = 16,
                              std::uint64_t seed = 3) {
  ShapeSetSpec s;
  s.task = task;
  s.num_classes = task == TaskKind::kMultiLabel ? 4 : 3;
  s.height = s.width = side;
  // The generator needs ten samples per class; trim afterwards.
  s.train_count = std::max(train, 10 * s.num_classes);
  s.test_count = std::max(test, 10 * s.num_classes);
  s.seed = seed;
  ShapeSet out = GenerateShapeSet(s);
  out.train.samples.resize(train);
  out.test.samples.resize(test);
  return out;
}

// Fresh directory under the system temp dir, removed up front.
inline std::filesystem::path ScratchDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("modellock_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace modellock::testing

// Checks that `stmt` throws modellock::Error with code `expected`.
#define EXPECT_ERROR_CODE(stmt, expected)                                   \
  do {                                                                      \
    try {                                                                   \
      stmt;                                                                 \
      FAIL_CHECK("expected " << ::modellock::ErrorCodeName(expected)        \
                             << " from " #stmt);                            \
    } catch (const ::modellock::Error& e) {                                 \
      INFO(e.what());                                                       \
      CHECK_EQ(std::string(::modellock::ErrorCodeName(e.code())),           \
               std::string(::modellock::ErrorCodeName(expected)));          \
    }                                                                       \
  } while (0)

#endif  // MODELLOCK_TESTS_TEST_UTIL_H_
