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

// Unlocked/locked performance metrics.
//
// LP is the task metric on the clean test set and UP the same metric after
// every test image has been edited with the key. Predictions of the lock class
// never count as correct.
//
// Task metric by task:
//   classification  top-1 accuracy
//   multi-label     macro AUROC over the original labels
//   segmentation    per-pixel accuracy

#ifndef MODELLOCK_EVALUATOR_H_
#define MODELLOCK_EVALUATOR_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "modellock/editor.h"
#include "modellock/tensor.h"
#include "modellock/trainer.h"

namespace modellock {

struct Metrics {
  double up = 0.0;
  double lp = 0.0;
  // Classification: accuracy per original class on the keyed test set.
  std::vector<double> per_class_accuracy;
  // Multi-label: keyed-set macro AUROC (same value as up).
  std::optional<double> auroc;
  // Segmentation: keyed-set pixel accuracy (same value as up).
  std::optional<double> pixel_accuracy;
  // Fraction of clean test inputs routed to the lock class. For multi-label a
  // positive lock-bit logit counts; for segmentation the lock-mask rate.
  double lock_class_rate = 0.0;

  nlohmann::json ToJson() const;
};

// Index of the largest logit (first on ties).
int Argmax(std::span<const float> logits);
std::vector<int> ArgmaxPredictions(const std::vector<std::vector<float>>& logits);

// Fraction of samples whose prediction equals the class label. Throws
// kTaskMismatch for non-classification datasets.
double AccuracyOf(std::span<const int> predictions, const Dataset& dataset);
double Accuracy(const Model& model, const Dataset& dataset);

// Fraction of predictions equal to `lock_class`.
double LockClassRate(std::span<const int> predictions, int lock_class);

// Mann-Whitney AUROC for one label; ties between a positive and a negative
// count one half. Returns nullopt when the labels are all one value.
std::optional<double> BinaryAuroc(std::span<const double> scores, const std::vector<bool>& labels);

struct AurocResult {
  double macro = 0.0;
  std::vector<std::optional<double>> per_label;
  std::vector<int> skipped;  // labels with a single class
};

// `scores[i][j]` is sample i's score for label j. Throws kInvalidArgument
// when every label is degenerate.
AurocResult MacroAuroc(const std::vector<std::vector<double>>& scores,
                       const std::vector<std::vector<bool>>& labels);

// Macro AUROC over the dataset's original labels, scored by logits.
AurocResult ModelAuroc(const Model& model, const Dataset& dataset);

// Per-pixel argmax mask from segmentation logits.
SegMask PredictMask(std::span<const float> logits, int height, int width, int classes);

// Intersection over union of two equal-length boolean regions; 0 when both
// are empty.
double RegionIou(const std::vector<bool>& a, const std::vector<bool>& b);

// IoU of the cells predicted as `lock_class` with the centered lock rectangle.
double LockRegionIou(const SegMask& predicted, int lock_class);

inline constexpr double kLockMaskIouThreshold = 0.5;

struct PixelMetrics {
  double pixel_accuracy = 0.0;
  // Fraction of images whose lock-region IoU exceeds the threshold.
  double lock_mask_rate = 0.0;
};

// `lock_class` defaults to dataset.num_classes, the id a lock appends.
PixelMetrics PixelMetricsOf(const Model& model, const Dataset& dataset);
PixelMetrics PixelMetricsFromMasks(const std::vector<SegMask>& predicted, const Dataset& dataset,
                                   int lock_class);

// Task metric (see top of file) of `model` on `dataset`.
double TaskScore(const Model& model, const Dataset& dataset);

// LP on `clean_test`, UP on `unlock` applied to every test image with
// per-sample seeds from (seed, id).
Metrics UpLpReport(const Model& model, const Dataset& clean_test, const ImageTransform& unlock,
                   std::uint64_t seed);
Metrics UpLpReport(const Model& model, const Dataset& clean_test, const EditKey& key,
                   const EditorConfig& editor, std::uint64_t seed);

}  // namespace modellock

#endif  // MODELLOCK_EVALUATOR_H_
