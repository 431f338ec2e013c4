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

#include "modellock/trainer.h"

#include <cmath>
#include <fstream>

#include "doctest.h"
#include "modellock/error.h"
#include "modellock/evaluator.h"
#include "modellock/hashing.h"
#include "modellock/mltd.h"
#include "test_util.h"

namespace modellock {
namespace {

using testing::RandomImage;
using testing::SmallShapeSet;

ModelSpec Spec(Arch arch, int side, int channels, int outputs, int hidden = 8) {
  ModelSpec s;
  s.arch = arch;
  s.height = s.width = side;
  s.channels = channels;
  s.output_classes = outputs;
  s.hidden_units = hidden;
  s.init_seed = 11;
  return s;
}

std::vector<const Sample*> Pointers(const Dataset& d) {
  std::vector<const Sample*> out;
  for (const Sample& s : d.samples) out.push_back(&s);
  return out;
}

TEST_CASE("ModelTest.WeightCounts") {
  CHECK_EQ(WeightCount(Spec(Arch::kLinear, 32, 3, 11)), 3072u * 11 + 11);
  CHECK_EQ(WeightCount(Spec(Arch::kMlp, 32, 3, 11, 128)), 3072u * 128 + 128 + 128 * 11 + 11);
  CHECK_EQ(WeightCount(Spec(Arch::kPerPixelLinear, 4, 3, 2)), 16u * 2 * 27 + 16 * 2);
}

TEST_CASE("ModelTest.InitDeterministicAndBounded") {
  const ModelSpec s = Spec(Arch::kMlp, 8, 3, 4);
  const Model a = InitModel(s), b = InitModel(s);
  CHECK(a.weights == b.weights);
  const double limit = 1.0 / std::sqrt(192.0);
  for (std::size_t i = 0; i < 192 * 8; ++i) CHECK(std::abs(a.weights[i]) <= limit);
  ModelSpec other = s;
  other.init_seed = 12;
  CHECK(InitModel(other).weights != a.weights);
}

TEST_CASE("ModelTest.SpecValidation") {
  ModelSpec s = Spec(Arch::kMlp, 8, 3, 4);
  s.hidden_units = 0;
  EXPECT_ERROR_CODE(ValidateModelSpec(s), ErrorCode::kConfig);
  s = Spec(Arch::kLinear, 8, 3, 1);
  EXPECT_ERROR_CODE(ValidateModelSpec(s), ErrorCode::kConfig);
}

TEST_CASE("ForwardTest.ZeroLinearGivesZeroLogits") {
  Model m{Spec(Arch::kLinear, 4, 3, 5), {}};
  m.weights.assign(WeightCount(m.spec), 0.0f);
  for (float v : Forward(m, RandomImage(4, 4, 3, 1))) CHECK_EQ(v, 0.0f);
}

// Naive loops over the documented layout: inputs shifted to [-0.5, 0.5],
// weights row-major [out][in] followed by biases.
std::vector<double> NaiveMlp(const Model& m, const Image& img) {
  const int d = m.spec.input_size(), h = m.spec.hidden_units, k = m.spec.output_classes;
  const float* w = m.weights.data();
  std::vector<double> hidden(h), out(k);
  for (int j = 0; j < h; ++j) {
    double acc = w[h * d + j];
    for (int i = 0; i < d; ++i) acc += w[j * d + i] * (img.data()[i] - 0.5);
    hidden[j] = std::max(0.0, acc);
  }
  const float* w2 = w + h * d + h;
  for (int c = 0; c < k; ++c) {
    double acc = w2[k * h + c];
    for (int j = 0; j < h; ++j) acc += w2[c * h + j] * hidden[j];
    out[c] = acc;
  }
  return out;
}

std::vector<double> NaiveLinear(const Model& m, const Image& img) {
  const int d = m.spec.input_size(), k = m.spec.output_classes;
  std::vector<double> out(k);
  for (int c = 0; c < k; ++c) {
    double acc = m.weights[k * d + c];
    for (int i = 0; i < d; ++i) acc += m.weights[c * d + i] * (img.data()[i] - 0.5);
    out[c] = acc;
  }
  return out;
}

TEST_CASE("ForwardTest.MatchesNaiveOracle") {
  for (int trial = 0; trial < 5; ++trial) {
    ModelSpec s = Spec(trial % 2 ? Arch::kMlp : Arch::kLinear, 6, 3, 4, 7);
    s.init_seed = trial;
    const Model m = InitModel(s);
    const Image img = RandomImage(6, 6, 3, 100 + trial);
    const auto got = Forward(m, img);
    const auto want = s.arch == Arch::kMlp ? NaiveMlp(m, img) : NaiveLinear(m, img);
    REQUIRE_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-5);
  }
}

TEST_CASE("ForwardTest.PerPixelNeighborhood") {
  ModelSpec s = Spec(Arch::kPerPixelLinear, 3, 1, 1);
  Model m{s, std::vector<float>(WeightCount(s), 0.0f)};
  // Center pixel's weight on its right neighbour (window slot 5) is one.
  m.weights[4 * 9 + 5] = 1.0f;
  std::vector<float> px(9, 0.5f);
  px[5] = 0.9f;
  const auto logits = Forward(m, Image(3, 3, 1, px));
  CHECK(logits[4] == doctest::Approx(0.4));
  for (int p = 0; p < 9; ++p) {
    if (p != 4) CHECK_EQ(logits[p], 0.0f);
  }
}

TEST_CASE("ForwardTest.BatchCompositionInvariant") {
  const Dataset d = SmallShapeSet(TaskKind::kClassification, 20, 30, 8).train;
  const Model m = InitModel(Spec(Arch::kMlp, 8, 3, 3));
  const auto all = ForwardAll(m, d);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto one = Forward(m, d.samples[i].image);
    for (std::size_t c = 0; c < one.size(); ++c) CHECK(all[i][c] == doctest::Approx(one[c]));
  }
}

TEST_CASE("ForwardTest.ShapeMismatch") {
  EXPECT_ERROR_CODE(Forward(InitModel(Spec(Arch::kLinear, 8, 3, 3)), Image(4, 4, 3)),
                    ErrorCode::kShapeMismatch);
}

TEST_CASE("LossTest.UniformLogitsGiveLogK") {
  const Dataset d = SmallShapeSet(TaskKind::kClassification, 10, 30, 8).train;
  const ModelSpec s = Spec(Arch::kLinear, 8, 3, 5);
  const std::vector<double> zeros(WeightCount(s), 0.0);
  const auto p = Pointers(d);
  CHECK(LossAndGrad(s, zeros, p, LossKind::kSoftmaxCrossEntropy).loss ==
        doctest::Approx(std::log(5.0)));
  const Dataset ml = SmallShapeSet(TaskKind::kMultiLabel, 10, 40, 8).train;
  const ModelSpec sm = Spec(Arch::kLinear, 8, 3, 4);
  CHECK(LossAndGrad(sm, std::vector<double>(WeightCount(sm), 0.0), Pointers(ml),
                    LossKind::kPerLabelBinaryCrossEntropy)
            .loss == doctest::Approx(std::log(2.0)));
}

TEST_CASE("LossTest.SaturatedCorrectPredictionNearZero") {
  const ModelSpec s = Spec(Arch::kLinear, 2, 1, 3);
  std::vector<double> w(WeightCount(s), 0.0);
  w[4 * 3 + 1] = 40.0;  // bias of class 1
  Dataset d;
  d.num_classes = 3;
  d.samples.push_back({0, Image(2, 2, 1, 0.5f), ClassId{1}});
  CHECK(LossAndGrad(s, w, Pointers(d), LossKind::kSoftmaxCrossEntropy).loss <= 1e-6);
}

TEST_CASE("LossTest.MismatchedLossRejected") {
  const Dataset d = SmallShapeSet(TaskKind::kClassification, 4, 30, 8).train;
  CHECK_THROWS_AS(LossAndGrad(InitModel(Spec(Arch::kLinear, 8, 3, 3)), Pointers(d),
                              LossKind::kPerPixelSoftmaxCrossEntropy),
                  Error);
}

double WorstRelativeError(const ModelSpec& s, const Dataset& d, LossKind loss) {
  const Model m = InitModel(s);
  std::vector<double> w(m.weights.begin(), m.weights.end());
  const CounterRng rng(s.init_seed + 99);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += rng.Uniform(i, -0.05, 0.05);
  const auto batch = Pointers(d);
  const LossGrad g = LossAndGrad(s, w, batch, loss);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t j = rng.Below(1'000'000 + t, w.size());
    auto plus = w, minus = w;
    plus[j] += 1e-4;
    minus[j] -= 1e-4;
    const double fd =
        (LossAndGrad(s, plus, batch, loss).loss - LossAndGrad(s, minus, batch, loss).loss) / 2e-4;
    const double scale = std::max(std::abs(fd), std::abs(g.grad[j]));
    if (scale < 1e-10) continue;
    worst = std::max(worst, std::abs(fd - g.grad[j]) / scale);
  }
  return worst;
}

TEST_CASE("GradientTest.FiniteDifferences") {
  const Dataset cls = SmallShapeSet(TaskKind::kClassification, 6, 30, 8).train;
  const Dataset ml = SmallShapeSet(TaskKind::kMultiLabel, 6, 40, 8).train;
  const Dataset seg = SmallShapeSet(TaskKind::kSegmentation, 6, 30, 8).train;
  CHECK(WorstRelativeError(Spec(Arch::kLinear, 8, 3, 3), cls, LossKind::kSoftmaxCrossEntropy) <= 1e-3);
  CHECK(WorstRelativeError(Spec(Arch::kMlp, 8, 3, 3), cls, LossKind::kSoftmaxCrossEntropy) <= 1e-3);
  CHECK(WorstRelativeError(Spec(Arch::kMlp, 8, 3, 4), ml, LossKind::kPerLabelBinaryCrossEntropy) <= 1e-3);
  CHECK(WorstRelativeError(Spec(Arch::kPerPixelLinear, 8, 3, 4), seg,
                           LossKind::kPerPixelSoftmaxCrossEntropy) <= 1e-3);
}

// Two Gaussian blobs, one per class, far apart in pixel space.
Dataset Blobs(int n) {
  Dataset d;
  d.num_classes = 2;
  const CounterRng rng(8);
  for (int i = 0; i < n; ++i) {
    const int y = i % 2;
    std::vector<float> px(16);
    for (int j = 0; j < 16; ++j) {
      px[j] = static_cast<float>((y ? 0.7 : 0.3) + rng.Uniform(i * 16 + j, -0.15, 0.15));
    }
    d.samples.push_back({static_cast<std::uint64_t>(i), Image(4, 4, 1, px),
                         ClassId{static_cast<std::uint32_t>(y)}});
  }
  return d;
}

TEST_CASE("TrainTest.SeparableBlobs") {
  const Dataset d = Blobs(200);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.batch_size = 16;
  const TrainResult r = Train(InitModel(Spec(Arch::kLinear, 4, 1, 2)), d, cfg);
  CHECK(Accuracy(r.model, d) >= 0.99);
}

TEST_CASE("TrainTest.DeterministicAndMonotone") {
  const Dataset d = SmallShapeSet(TaskKind::kClassification, 600, 30, 16).train;
  TrainConfig cfg;
  cfg.shuffle_seed = 4;
  const Model init = InitModel(Spec(Arch::kMlp, 16, 3, 3, 32));
  const TrainResult a = Train(init, d, cfg);
  const TrainResult b = Train(init, d, cfg);
  CHECK(a.model.weights == b.model.weights);
  REQUIRE_EQ(a.loss_curve.size(), 10u);
  for (std::size_t i = 0; i < a.loss_curve.size(); ++i) {
    CHECK(std::isfinite(a.loss_curve[i]));
    if (i > 0) CHECK(a.loss_curve[i] <= 1.05 * a.loss_curve[i - 1]);
  }
  cfg.shuffle_seed = 5;
  CHECK(Train(init, d, cfg).model.weights != a.model.weights);
}

TEST_CASE("TrainTest.LossDecomposesOverSubsets") {
  const Dataset d = SmallShapeSet(TaskKind::kClassification, 90, 30, 8).train;
  const Model m = InitModel(Spec(Arch::kMlp, 8, 3, 3));
  Dataset a = d, b = d;
  a.samples.resize(60);
  b.samples.erase(b.samples.begin(), b.samples.begin() + 60);
  const double total = DatasetLoss(m, d, LossKind::kSoftmaxCrossEntropy);
  const double parts = (60 * DatasetLoss(m, a, LossKind::kSoftmaxCrossEntropy) +
                        30 * DatasetLoss(m, b, LossKind::kSoftmaxCrossEntropy)) /
                       90.0;
  CHECK(std::abs(total - parts) <= 1e-6);
}

TEST_CASE("TrainTest.ConfigValidation") {
  TrainConfig cfg;
  cfg.batch_size = 0;
  EXPECT_ERROR_CODE(ValidateTrainConfig(cfg), ErrorCode::kConfig);
  cfg = {};
  cfg.momentum = 1.0f;
  EXPECT_ERROR_CODE(ValidateTrainConfig(cfg), ErrorCode::kConfig);
}

TEST_CASE("CheckpointTest.RoundTripAndCorruption") {
  const auto dir = testing::ScratchDir("ckpt");
  const Model m = InitModel(Spec(Arch::kMlp, 8, 3, 4));
  SaveCheckpoint(m, {{"note", "test"}}, dir / "m.ckpt");
  const Model back = LoadCheckpoint(dir / "m.ckpt");
  CHECK(back.spec == m.spec);
  CHECK(back.weights == m.weights);

  auto bytes = ReadFileBytes(dir / "m.ckpt");
  auto flipped = bytes;
  flipped[flipped.size() - 20] ^= 0x40;
  WriteFileBytes(dir / "flipped.ckpt", flipped);
  EXPECT_ERROR_CODE(LoadCheckpoint(dir / "flipped.ckpt"), ErrorCode::kChecksum);
  bytes.resize(bytes.size() - 100);
  WriteFileBytes(dir / "short.ckpt", bytes);
  EXPECT_ERROR_CODE(LoadCheckpoint(dir / "short.ckpt"), ErrorCode::kTruncated);
}

}  // namespace
}  // namespace modellock
