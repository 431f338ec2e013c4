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

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "modellock/error.h"
#include "modellock/hashing.h"

namespace modellock {
namespace {

constexpr int kSupersample = 4;
constexpr double kBackground = 0.2;
constexpr std::uint64_t kShapeStream = 0x5A4E5E7ULL;

bool Inside(ShapeKind kind, double dx, double dy, double r) {
  switch (kind) {
    case ShapeKind::kDisc:
      return dx * dx + dy * dy <= r * r;
    case ShapeKind::kSquare:
      return std::abs(dx) <= 0.85 * r && std::abs(dy) <= 0.85 * r;
    case ShapeKind::kTriangle:
      return dy <= r && std::abs(dx) <= (dy + r) / 2.0;
    case ShapeKind::kCross:
      return (std::abs(dx) <= r / 3 && std::abs(dy) <= r) ||
             (std::abs(dy) <= r / 3 && std::abs(dx) <= r);
    case ShapeKind::kRing: {
      const double d2 = dx * dx + dy * dy;
      return d2 <= r * r && d2 >= 0.3 * r * r;
    }
    case ShapeKind::kDiamond:
      return std::abs(dx) + std::abs(dy) <= r;
  }
  return false;
}

// Box-Muller from two counter draws.
double Gaussian(const CounterRng& rng, std::uint64_t counter) {
  const double u1 = std::max(rng.Uniform(2 * counter), 1e-300);
  const double u2 = rng.Uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

struct Canvas {
  int h, w, c;
  std::vector<double> px;

  Canvas(int h_, int w_, int c_) : h(h_), w(w_), c(c_), px(static_cast<std::size_t>(h_) * w_ * c_) {}
  double& at(int y, int x, int ch) { return px[(static_cast<std::size_t>(y) * w + x) * c + ch]; }
};

struct Draw {
  ShapeKind kind;
  double cx, cy, r;
  std::array<double, 3> color;
};

// Paints shapes over a random background and adds noise. Returns the image
// and per-pixel coverage of each draw.
Image Render(const ShapeSetSpec& spec, const CounterRng& rng, const std::vector<Draw>& draws,
             std::vector<std::vector<float>>* coverage) {
  Canvas canvas(spec.height, spec.width, spec.channels);
  constexpr std::array<double, 3> background{kBackground, kBackground, kBackground};
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      for (int ch = 0; ch < spec.channels; ++ch) canvas.at(y, x, ch) = background[ch];
    }
  }
  if (coverage != nullptr) coverage->assign(draws.size(), {});
  for (std::size_t d = 0; d < draws.size(); ++d) {
    const Draw& draw = draws[d];
    if (coverage != nullptr) (*coverage)[d].assign(static_cast<std::size_t>(spec.height) * spec.width, 0.0f);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const float a = ShapeCoverage(draw.kind, draw.cx, draw.cy, draw.r, x, y);
        if (coverage != nullptr) (*coverage)[d][static_cast<std::size_t>(y) * spec.width + x] = a;
        if (a == 0.0f) continue;
        for (int ch = 0; ch < spec.channels; ++ch) {
          const double col = spec.channels == 1
                                 ? 0.299 * draw.color[0] + 0.587 * draw.color[1] + 0.114 * draw.color[2]
                                 : draw.color[ch];
          canvas.at(y, x, ch) = (1.0 - a) * canvas.at(y, x, ch) + a * col;
        }
      }
    }
  }
  std::vector<float> data(canvas.px.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = static_cast<float>(canvas.px[i] + spec.noise * Gaussian(rng, 1000 + i));
  }
  return Image::Clamped(spec.height, spec.width, spec.channels, std::move(data));
}

std::array<double, 3> RandomColor(const CounterRng& rng, std::uint64_t base) {
  return {rng.Uniform(base, 0.55, 1.0), rng.Uniform(base + 1, 0.55, 1.0),
          rng.Uniform(base + 2, 0.55, 1.0)};
}

Sample MakeSingleShape(const ShapeSetSpec& spec, std::uint64_t id) {
  const CounterRng rng(MixSeed(MixSeed(spec.seed, kShapeStream), id));
  const int cls = static_cast<int>(id % static_cast<std::uint64_t>(spec.num_classes));
  const double side = std::min(spec.height, spec.width);
  Draw draw;
  draw.kind = static_cast<ShapeKind>(cls);
  draw.cx = spec.width / 2.0 + rng.Uniform(0, -0.12, 0.12) * spec.width;
  draw.cy = spec.height / 2.0 + rng.Uniform(1, -0.12, 0.12) * spec.height;
  draw.r = rng.Uniform(2, 0.22, 0.32) * side;
  draw.color = RandomColor(rng, 3);

  Sample s;
  s.id = id;
  if (spec.task == TaskKind::kSegmentation) {
    std::vector<std::vector<float>> coverage;
    s.image = Render(spec, rng, {draw}, &coverage);
    SegMask mask{spec.height, spec.width, std::vector<std::uint16_t>(coverage[0].size(), 0)};
    for (std::size_t i = 0; i < mask.cells.size(); ++i) {
      if (coverage[0][i] >= 0.5f) mask.cells[i] = static_cast<std::uint16_t>(cls + 1);
    }
    s.label = std::move(mask);
  } else {
    s.image = Render(spec, rng, {draw}, nullptr);
    s.label = ClassId{static_cast<std::uint32_t>(cls)};
  }
  return s;
}

// One shape kind per label bit, each present with probability 1/2 and placed
// in its own quadrant.
Sample MakeMultiShape(const ShapeSetSpec& spec, std::uint64_t id) {
  const CounterRng rng(MixSeed(MixSeed(spec.seed, kShapeStream), id));
  std::array<int, 4> quadrant{0, 1, 2, 3};
  for (int i = 3; i > 0; --i) std::swap(quadrant[i], quadrant[rng.Below(10 + i, i + 1)]);
  MultiLabel label;
  std::vector<Draw> draws;
  for (int k = 0; k < spec.num_classes; ++k) {
    const bool present = rng.Uniform(20 + k) < 0.5;
    label.bits.push_back(present);
    if (!present) continue;
    const int q = quadrant[k];
    Draw draw;
    draw.kind = static_cast<ShapeKind>(k);
    draw.cx = spec.width * (q % 2 == 0 ? 0.27 : 0.73) + rng.Uniform(30 + 4 * k, -0.05, 0.05) * spec.width;
    draw.cy = spec.height * (q / 2 == 0 ? 0.27 : 0.73) + rng.Uniform(31 + 4 * k, -0.05, 0.05) * spec.height;
    draw.r = rng.Uniform(32 + 4 * k, 0.13, 0.18) * std::min(spec.height, spec.width);
    draw.color = RandomColor(rng, 60 + 3 * k);
    draws.push_back(draw);
  }
  Sample s;
  s.id = id;
  s.image = Render(spec, rng, draws, nullptr);
  s.label = std::move(label);
  return s;
}

}  // namespace

float ShapeCoverage(ShapeKind kind, double cx, double cy, double r, int x, int y) {
  int hits = 0;
  for (int sy = 0; sy < kSupersample; ++sy) {
    for (int sx = 0; sx < kSupersample; ++sx) {
      const double px = x + (sx + 0.5) / kSupersample;
      const double py = y + (sy + 0.5) / kSupersample;
      hits += Inside(kind, px - cx, py - cy, r) ? 1 : 0;
    }
  }
  return static_cast<float>(hits) / (kSupersample * kSupersample);
}

nlohmann::json ShapeSetSpec::ToJson() const {
  return {{"task", TaskName(task)}, {"num_classes", num_classes}, {"height", height},
          {"width", width},         {"channels", channels},       {"train_count", train_count},
          {"test_count", test_count},     {"noise", noise},             {"seed", seed}};
}

ShapeSetSpec ShapeSetSpec::FromJson(const nlohmann::json& doc) {
  static const char* const kKeys[] = {"task",        "num_classes", "height", "width", "channels",
                                      "train_count", "test_count",  "noise",  "seed"};
  if (!doc.is_object()) throw Error(ErrorCode::kConfig, "shapeset spec must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      throw Error(ErrorCode::kConfig, "unknown key '" + key + "' in shapeset spec");
    }
  }
  ShapeSetSpec spec;
  spec.task = ParseTask(doc.value("task", std::string("classification")));
  spec.num_classes = doc.value("num_classes", spec.task == TaskKind::kMultiLabel ? 4 : 3);
  spec.height = doc.value("height", spec.height);
  spec.width = doc.value("width", spec.width);
  spec.channels = doc.value("channels", spec.channels);
  spec.train_count = doc.value("train_count", spec.train_count);
  spec.test_count = doc.value("test_count", spec.test_count);
  spec.noise = doc.value("noise", spec.noise);
  spec.seed = doc.value("seed", spec.seed);
  return spec;
}

void ValidateShapeSetSpec(const ShapeSetSpec& spec) {
  const int max_classes = spec.task == TaskKind::kMultiLabel ? 4 : kNumShapeKinds;
  if (spec.num_classes < 1 || spec.num_classes > max_classes ||
      (spec.task != TaskKind::kMultiLabel && spec.num_classes < 2)) {
    throw Error(ErrorCode::kConfig, "num_classes out of range for the ShapeSet task");
  }
  if (spec.height < 8 || spec.width < 8 || (spec.channels != 1 && spec.channels != 3)) {
    throw Error(ErrorCode::kConfig, "ShapeSet images must be at least 8x8 with 1 or 3 channels");
  }
  const int min_count = 10 * spec.num_classes;
  if (spec.train_count < min_count || spec.test_count < min_count) {
    throw Error(ErrorCode::kConfig, "train/test counts must be >= 10 * num_classes");
  }
  if (!(spec.noise >= 0.0f && spec.noise <= 0.5f)) {
    throw Error(ErrorCode::kConfig, "noise must lie in [0, 0.5]");
  }
}

ShapeSet GenerateShapeSet(const ShapeSetSpec& spec) {
  ValidateShapeSetSpec(spec);
  ShapeSet out;
  for (Dataset* d : {&out.train, &out.test}) {
    d->task = spec.task;
    d->num_classes = static_cast<std::uint32_t>(
        spec.task == TaskKind::kSegmentation ? spec.num_classes + 1 : spec.num_classes);
  }
  auto make = [&spec](std::uint64_t id) {
    return spec.task == TaskKind::kMultiLabel ? MakeMultiShape(spec, id) : MakeSingleShape(spec, id);
  };
  const auto n_train = static_cast<std::uint64_t>(spec.train_count);
  for (std::uint64_t id = 0; id < n_train; ++id) out.train.samples.push_back(make(id));
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(spec.test_count); ++i) {
    out.test.samples.push_back(make(n_train + i));
  }
  return out;
}

}  // namespace modellock
