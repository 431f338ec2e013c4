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

#include "modellock/evaluator.h"

#include <algorithm>
#include <numeric>

#include "modellock/error.h"
#include "modellock/locksmith.h"

namespace modellock {
namespace {

void RequireTask(const Dataset& dataset, TaskKind task) {
  if (dataset.task != task) {
    throw Error(ErrorCode::kTaskMismatch, "expected a " + std::string(TaskName(task)) +
                                              " dataset, got " +
                                              std::string(TaskName(dataset.task)));
  }
}

void RequireCompatible(const Model& model, const Dataset& dataset) {
  if (dataset.samples.empty()) throw Error(ErrorCode::kInvalidArgument, "empty test set");
  if (static_cast<std::uint32_t>(model.spec.output_classes) < dataset.num_classes) {
    throw Error(ErrorCode::kShapeMismatch, "model has fewer outputs than the dataset has classes");
  }
  const bool per_pixel = model.spec.arch == Arch::kPerPixelLinear;
  if (per_pixel != (dataset.task == TaskKind::kSegmentation)) {
    throw Error(ErrorCode::kTaskMismatch, "model architecture does not fit the task");
  }
}

std::vector<std::vector<double>> LabelScores(const std::vector<std::vector<float>>& logits,
                                             std::size_t labels) {
  std::vector<std::vector<double>> scores(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    scores[i].assign(logits[i].begin(), logits[i].begin() + static_cast<long>(labels));
  }
  return scores;
}

std::vector<std::vector<bool>> LabelBits(const Dataset& dataset) {
  std::vector<std::vector<bool>> bits;
  bits.reserve(dataset.size());
  for (const Sample& s : dataset.samples) {
    std::vector<bool> b = std::get<MultiLabel>(s.label).bits;
    b.resize(dataset.num_classes, false);
    bits.push_back(std::move(b));
  }
  return bits;
}

std::vector<SegMask> PredictMasks(const Model& model, const Dataset& dataset) {
  std::vector<SegMask> masks;
  masks.reserve(dataset.size());
  for (const auto& l : ForwardAll(model, dataset)) {
    masks.push_back(PredictMask(l, model.spec.height, model.spec.width, model.spec.output_classes));
  }
  return masks;
}

}  // namespace

nlohmann::json Metrics::ToJson() const {
  nlohmann::json doc = {{"up", up},
                        {"lp", lp},
                        {"per_class_accuracy", per_class_accuracy},
                        {"lock_class_rate", lock_class_rate}};
  if (auroc) doc["auroc"] = *auroc;
  if (pixel_accuracy) doc["pixel_accuracy"] = *pixel_accuracy;
  return doc;
}

int Argmax(std::span<const float> logits) {
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

std::vector<int> ArgmaxPredictions(const std::vector<std::vector<float>>& logits) {
  std::vector<int> out;
  out.reserve(logits.size());
  for (const auto& l : logits) out.push_back(Argmax(l));
  return out;
}

double AccuracyOf(std::span<const int> predictions, const Dataset& dataset) {
  RequireTask(dataset, TaskKind::kClassification);
  if (predictions.size() != dataset.size()) {
    throw Error(ErrorCode::kShapeMismatch, "prediction count differs from dataset size");
  }
  if (dataset.samples.empty()) throw Error(ErrorCode::kInvalidArgument, "empty dataset");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto truth = std::get<ClassId>(dataset.samples[i].label).value;
    hits += predictions[i] >= 0 && static_cast<std::uint32_t>(predictions[i]) == truth;
  }
  return static_cast<double>(hits) / static_cast<double>(dataset.size());
}

double Accuracy(const Model& model, const Dataset& dataset) {
  RequireTask(dataset, TaskKind::kClassification);
  RequireCompatible(model, dataset);
  return AccuracyOf(ArgmaxPredictions(ForwardAll(model, dataset)), dataset);
}

double LockClassRate(std::span<const int> predictions, int lock_class) {
  if (predictions.empty()) return 0.0;
  const auto n = std::count(predictions.begin(), predictions.end(), lock_class);
  return static_cast<double>(n) / static_cast<double>(predictions.size());
}

std::optional<double> BinaryAuroc(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kShapeMismatch, "scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) return std::nullopt;

  // Rank-sum with midranks for tied scores.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]]) pos_rank_sum += midrank;
    }
    i = j;
  }
  const double p = static_cast<double>(pos);
  const double u = pos_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(neg));
}

AurocResult MacroAuroc(const std::vector<std::vector<double>>& scores,
                       const std::vector<std::vector<bool>>& labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "need one score row and one label row per sample");
  }
  const std::size_t num_labels = labels.front().size();
  AurocResult out;
  double sum = 0.0;
  int counted = 0;
  std::vector<double> column(scores.size());
  std::vector<bool> truth(scores.size());
  for (std::size_t j = 0; j < num_labels; ++j) {
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i].size() < num_labels || labels[i].size() != num_labels) {
        throw Error(ErrorCode::kShapeMismatch, "ragged score or label rows");
      }
      column[i] = scores[i][j];
      truth[i] = labels[i][j];
    }
    const auto a = BinaryAuroc(column, truth);
    out.per_label.push_back(a);
    if (a) {
      sum += *a;
      ++counted;
    } else {
      out.skipped.push_back(static_cast<int>(j));
    }
  }
  if (counted == 0) throw Error(ErrorCode::kInvalidArgument, "every label is degenerate");
  out.macro = sum / counted;
  return out;
}

AurocResult ModelAuroc(const Model& model, const Dataset& dataset) {
  RequireTask(dataset, TaskKind::kMultiLabel);
  RequireCompatible(model, dataset);
  return MacroAuroc(LabelScores(ForwardAll(model, dataset), dataset.num_classes),
                    LabelBits(dataset));
}

SegMask PredictMask(std::span<const float> logits, int height, int width, int classes) {
  const std::size_t pixels = static_cast<std::size_t>(height) * width;
  if (logits.size() != pixels * classes) {
    throw Error(ErrorCode::kShapeMismatch, "logit count does not match mask size");
  }
  SegMask mask{height, width, std::vector<std::uint16_t>(pixels)};
  for (std::size_t p = 0; p < pixels; ++p) {
    mask.cells[p] = static_cast<std::uint16_t>(Argmax(logits.subspan(p * classes, classes)));
  }
  return mask;
}

double RegionIou(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kShapeMismatch, "region sizes differ");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += a[i] && b[i];
    uni += a[i] || b[i];
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double LockRegionIou(const SegMask& predicted, int lock_class) {
  const PixelRect rect = LockRectangle(predicted.height, predicted.width);
  std::vector<bool> pred(predicted.cells.size()), canon(predicted.cells.size());
  for (int y = 0; y < predicted.height; ++y) {
    for (int x = 0; x < predicted.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * predicted.width + x;
      pred[i] = predicted.cells[i] == lock_class;
      canon[i] = rect.Contains(x, y);
    }
  }
  return RegionIou(pred, canon);
}

PixelMetrics PixelMetricsFromMasks(const std::vector<SegMask>& predicted, const Dataset& dataset,
                                   int lock_class) {
  RequireTask(dataset, TaskKind::kSegmentation);
  if (predicted.size() != dataset.size() || dataset.samples.empty()) {
    throw Error(ErrorCode::kShapeMismatch, "need one predicted mask per sample");
  }
  std::size_t hits = 0, cells = 0, locked = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const auto& truth = std::get<SegMask>(dataset.samples[i].label);
    if (truth.cells.size() != predicted[i].cells.size()) {
      throw Error(ErrorCode::kShapeMismatch, "predicted mask size differs from label");
    }
    for (std::size_t p = 0; p < truth.cells.size(); ++p) hits += truth.cells[p] == predicted[i].cells[p];
    cells += truth.cells.size();
    locked += LockRegionIou(predicted[i], lock_class) > kLockMaskIouThreshold;
  }
  return {static_cast<double>(hits) / static_cast<double>(cells),
          static_cast<double>(locked) / static_cast<double>(predicted.size())};
}

PixelMetrics PixelMetricsOf(const Model& model, const Dataset& dataset) {
  RequireTask(dataset, TaskKind::kSegmentation);
  RequireCompatible(model, dataset);
  return PixelMetricsFromMasks(PredictMasks(model, dataset), dataset,
                               static_cast<int>(dataset.num_classes));
}

double TaskScore(const Model& model, const Dataset& dataset) {
  switch (dataset.task) {
    case TaskKind::kClassification: return Accuracy(model, dataset);
    case TaskKind::kMultiLabel: return ModelAuroc(model, dataset).macro;
    case TaskKind::kSegmentation: return PixelMetricsOf(model, dataset).pixel_accuracy;
  }
  throw Error(ErrorCode::kTaskMismatch, "unknown task");
}

Metrics UpLpReport(const Model& model, const Dataset& clean_test, const ImageTransform& unlock,
                   std::uint64_t seed) {
  RequireCompatible(model, clean_test);
  const Dataset keyed = EditAll(clean_test, unlock, seed);
  const int lock_class = static_cast<int>(clean_test.num_classes);
  Metrics m;
  switch (clean_test.task) {
    case TaskKind::kClassification: {
      const std::vector<int> clean_pred = ArgmaxPredictions(ForwardAll(model, clean_test));
      const std::vector<int> keyed_pred = ArgmaxPredictions(ForwardAll(model, keyed));
      m.lp = AccuracyOf(clean_pred, clean_test);
      m.up = AccuracyOf(keyed_pred, keyed);
      m.lock_class_rate = LockClassRate(clean_pred, lock_class);
      std::vector<std::size_t> hits(clean_test.num_classes), counts(clean_test.num_classes);
      for (std::size_t i = 0; i < keyed.size(); ++i) {
        const auto truth = std::get<ClassId>(keyed.samples[i].label).value;
        ++counts[truth];
        hits[truth] += static_cast<std::uint32_t>(keyed_pred[i]) == truth;
      }
      for (std::size_t c = 0; c < counts.size(); ++c) {
        m.per_class_accuracy.push_back(
            counts[c] == 0 ? 0.0 : static_cast<double>(hits[c]) / static_cast<double>(counts[c]));
      }
      break;
    }
    case TaskKind::kMultiLabel: {
      const auto clean_logits = ForwardAll(model, clean_test);
      const auto bits = LabelBits(clean_test);
      m.lp = MacroAuroc(LabelScores(clean_logits, clean_test.num_classes), bits).macro;
      m.up = MacroAuroc(LabelScores(ForwardAll(model, keyed), clean_test.num_classes), bits).macro;
      m.auroc = m.up;
      if (model.spec.output_classes > lock_class) {
        std::size_t flagged = 0;
        for (const auto& l : clean_logits) flagged += l[lock_class] > 0.0f;
        m.lock_class_rate = static_cast<double>(flagged) / static_cast<double>(clean_logits.size());
      }
      break;
    }
    case TaskKind::kSegmentation: {
      const PixelMetrics clean = PixelMetricsOf(model, clean_test);
      const PixelMetrics edited = PixelMetricsOf(model, keyed);
      m.lp = clean.pixel_accuracy;
      m.up = edited.pixel_accuracy;
      m.pixel_accuracy = m.up;
      m.lock_class_rate = clean.lock_mask_rate;
      break;
    }
  }
  return m;
}

Metrics UpLpReport(const Model& model, const Dataset& clean_test, const EditKey& key,
                   const EditorConfig& editor, std::uint64_t seed) {
  return UpLpReport(model, clean_test, MakeKeyedTransform(key, editor), seed);
}

}  // namespace modellock
