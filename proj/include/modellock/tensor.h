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

// Core value types shared by every stage of the pipeline: images, labels,
// samples and datasets. Pixels live in [0, 1]; constructors reject anything
// else and clamping is always an explicit call.

#ifndef MODELLOCK_TENSOR_H_
#define MODELLOCK_TENSOR_H_

#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace modellock {

class Image {
 public:
  Image() = default;
  // Filled with `fill`, which must itself be in range.
  Image(int height, int width, int channels, float fill = 0.0f);
  // Takes ownership of row-major HWC data. Throws on size mismatch or any
  // element outside [0, 1] (NaN included).
  Image(int height, int width, int channels, std::vector<float> data);

  // Builds an image from arbitrary floats by clamping into [0, 1]. NaN maps
  // to 0.
  static Image Clamped(int height, int width, int channels,
                       std::vector<float> data);
  // Converts 8-bit intensities by dividing by 255.
  static Image FromBytes(int height, int width, int channels,
                         std::span<const std::uint8_t> bytes);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<const float> data() const { return data_; }

  float at(int y, int x, int c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  bool SameShape(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

struct ClassId {
  std::uint32_t value = 0;
  friend bool operator==(const ClassId&, const ClassId&) = default;
};

struct MultiLabel {
  std::vector<bool> bits;
  friend bool operator==(const MultiLabel&, const MultiLabel&) = default;
};

struct SegMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint16_t> cells;  // row-major class ids

  std::uint16_t at(int y, int x) const {
    return cells[static_cast<std::size_t>(y) * width + x];
  }
  friend bool operator==(const SegMask&, const SegMask&) = default;
};

using Label = std::variant<ClassId, MultiLabel, SegMask>;

enum class TaskKind : std::uint8_t {
  kClassification = 0,
  kMultiLabel = 1,
  kSegmentation = 2,
};

std::string_view TaskName(TaskKind task);
TaskKind ParseTask(std::string_view name);

struct Sample {
  std::uint64_t id = 0;
  Image image;
  Label label;
  bool edited = false;
  bool relabeled = false;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
  TaskKind task = TaskKind::kClassification;
  // Original class count. For segmentation this includes the background
  // class; for multi-label it is the number of label bits.
  std::uint32_t num_classes = 0;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Checks the Dataset invariants (unique ids, shared channel count, labels
// compatible with the task, edited/relabeled exclusivity). `label_bound` is
// the exclusive upper bound for class ids, num_classes for a clean dataset and
// num_classes + 1 once a lock class has been appended. Throws Error.
void ValidateDataset(const Dataset& dataset, std::uint32_t label_bound);

}  // namespace modellock

#endif  // MODELLOCK_TENSOR_H_
