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

// Small differentiable classifiers trained with mini-batch momentum SGD.
//
// The training objective is the empirical risk over the merged locked set.
// Because D' is the disjoint union of the edited and relabeled subsets, this
// single risk is exactly the sum of the learning term (edited samples, true
// labels) and the locking term (clean samples, lock labels).

#ifndef MODELLOCK_TRAINER_H_
#define MODELLOCK_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "modellock/tensor.h"

namespace modellock {

enum class Arch { kLinear, kMlp, kPerPixelLinear };

std::string_view ArchName(Arch arch);
Arch ParseArch(std::string_view name);

struct ModelSpec {
  Arch arch = Arch::kMlp;
  int hidden_units = 128;  // MLP only
  int height = 32;
  int width = 32;
  int channels = 3;
  int output_classes = 2;  // includes the lock class when locked
  std::uint64_t init_seed = 0;

  int input_size() const { return height * width * channels; }
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

void ValidateModelSpec(const ModelSpec& spec);
std::size_t WeightCount(const ModelSpec& spec);

struct Model {
  ModelSpec spec;
  std::vector<float> weights;
};

// Fan-in scaled uniform weights in [-1/sqrt(fan_in), 1/sqrt(fan_in)], zero
// biases.
Model InitModel(const ModelSpec& spec);

// Logits for one image. Segmentation models return H*W*K values, pixel-major.
std::vector<float> Forward(const Model& model, const Image& image);
// Logits for every sample, evaluated in chunks with one weight conversion.
std::vector<std::vector<float>> ForwardAll(const Model& model, const Dataset& dataset);

enum class LossKind {
  kSoftmaxCrossEntropy,
  kPerLabelBinaryCrossEntropy,
  kPerPixelSoftmaxCrossEntropy,
};

std::string_view LossName(LossKind loss);
LossKind ParseLoss(std::string_view name);
LossKind DefaultLossFor(TaskKind task);

struct TrainConfig {
  int epochs = 10;
  int batch_size = 64;
  float learning_rate = 0.01f;
  float momentum = 0.9f;
  std::uint64_t shuffle_seed = 0;
  LossKind loss = LossKind::kSoftmaxCrossEntropy;

  nlohmann::json ToJson() const;
};

void ValidateTrainConfig(const TrainConfig& cfg);

struct LossGrad {
  double loss = 0.0;  // mean over the batch
  std::vector<double> grad;
};

// Mean loss over `batch` and its gradient with respect to `weights`, which
// must have WeightCount(spec) entries. The double-precision entry point is
// what the finite-difference checks perturb.
LossGrad LossAndGrad(const ModelSpec& spec, std::span<const double> weights,
                     std::span<const Sample* const> batch, LossKind loss);
LossGrad LossAndGrad(const Model& model, std::span<const Sample* const> batch, LossKind loss);

// Mean loss over a whole dataset, evaluated in chunks.
double DatasetLoss(const Model& model, const Dataset& dataset, LossKind loss);

struct TrainResult {
  Model model;
  std::vector<double> loss_curve;  // per-epoch mean training loss
};

TrainResult Train(const Model& initial, const Dataset& dataset, const TrainConfig& cfg);

// Checkpoint: one JSON header line (spec, train config, digests), then a u64
// weight count, the f32 weights, and a CRC-32 of all preceding bytes.
void SaveCheckpoint(const Model& model, const nlohmann::json& header_extra,
                    const std::filesystem::path& path);
Model LoadCheckpoint(const std::filesystem::path& path);

nlohmann::json ModelSpecToJson(const ModelSpec& spec);
ModelSpec ModelSpecFromJson(const nlohmann::json& doc);

}  // namespace modellock

#endif  // MODELLOCK_TRAINER_H_
