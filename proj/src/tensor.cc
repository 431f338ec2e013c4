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

#include "modellock/tensor.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "modellock/error.h"

namespace modellock {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kTaskMismatch: return "task-mismatch";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kChecksum: return "checksum";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kTransport: return "transport";
    case ErrorCode::kProtocolVersion: return "protocol-version";
    case ErrorCode::kRemote: return "remote";
  }
  return "unknown";
}

namespace {

void CheckDims(int height, int width, int channels) {
  if (height <= 0 || width <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "image dimensions must be positive");
  }
  if (channels != 1 && channels != 3) {
    throw Error(ErrorCode::kInvalidArgument, "channels must be 1 or 3");
  }
}

std::size_t Volume(int height, int width, int channels) {
  return static_cast<std::size_t>(height) * width * channels;
}

}  // namespace

Image::Image(int height, int width, int channels, float fill)
    : height_(height), width_(width), channels_(channels) {
  CheckDims(height, width, channels);
  if (!(fill >= 0.0f && fill <= 1.0f)) {
    throw Error(ErrorCode::kInvalidArgument, "fill value outside [0, 1]");
  }
  data_.assign(Volume(height, width, channels), fill);
}

Image::Image(int height, int width, int channels, std::vector<float> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  CheckDims(height, width, channels);
  if (data_.size() != Volume(height, width, channels)) {
    throw Error(ErrorCode::kShapeMismatch,
                "pixel payload length " + std::to_string(data_.size()) +
                    " does not match " + std::to_string(height) + "x" +
                    std::to_string(width) + "x" + std::to_string(channels));
  }
  for (float v : data_) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw Error(ErrorCode::kInvalidArgument, "pixel value outside [0, 1]");
    }
  }
}

Image Image::Clamped(int height, int width, int channels,
                     std::vector<float> data) {
  for (float& v : data) {
    v = std::isnan(v) ? 0.0f : std::clamp(v, 0.0f, 1.0f);
  }
  return Image(height, width, channels, std::move(data));
}

Image Image::FromBytes(int height, int width, int channels,
                       std::span<const std::uint8_t> bytes) {
  std::vector<float> data(bytes.size());
  std::transform(bytes.begin(), bytes.end(), data.begin(),
                 [](std::uint8_t b) { return static_cast<float>(b) / 255.0f; });
  return Image(height, width, channels, std::move(data));
}

std::string_view TaskName(TaskKind task) {
  switch (task) {
    case TaskKind::kClassification: return "classification";
    case TaskKind::kMultiLabel: return "multilabel";
    case TaskKind::kSegmentation: return "segmentation";
  }
  return "unknown";
}

TaskKind ParseTask(std::string_view name) {
  if (name == "classification") return TaskKind::kClassification;
  if (name == "multilabel" || name == "multi-label") return TaskKind::kMultiLabel;
  if (name == "segmentation") return TaskKind::kSegmentation;
  throw Error(ErrorCode::kInvalidArgument, "unknown task '" + std::string(name) + "'");
}

void ValidateDataset(const Dataset& dataset, std::uint32_t label_bound) {
  if (dataset.num_classes == 0) {
    throw Error(ErrorCode::kInvalidArgument, "num_classes must be positive");
  }
  std::set<std::uint64_t> ids;
  int channels = -1;
  for (const Sample& s : dataset.samples) {
    if (!ids.insert(s.id).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate sample id " + std::to_string(s.id));
    }
    if (s.edited && s.relabeled) {
      throw Error(ErrorCode::kInvalidArgument,
                  "sample " + std::to_string(s.id) + " is both edited and relabeled");
    }
    if (channels < 0) channels = s.image.channels();
    if (s.image.channels() != channels) {
      throw Error(ErrorCode::kShapeMismatch, "images do not share a channel count");
    }
    switch (dataset.task) {
      case TaskKind::kClassification: {
        const auto* c = std::get_if<ClassId>(&s.label);
        if (c == nullptr) throw Error(ErrorCode::kTaskMismatch, "expected class label");
        if (c->value >= label_bound) {
          throw Error(ErrorCode::kInvalidArgument,
                      "class id " + std::to_string(c->value) + " out of range");
        }
        break;
      }
      case TaskKind::kMultiLabel: {
        const auto* m = std::get_if<MultiLabel>(&s.label);
        if (m == nullptr) throw Error(ErrorCode::kTaskMismatch, "expected multi-label");
        // Edited samples of a locked set keep their original bits, one short
        // of the lock bit.
        if (m->bits.size() > label_bound || m->bits.size() + 1 < label_bound) {
          throw Error(ErrorCode::kInvalidArgument, "multi-label length mismatch");
        }
        break;
      }
      case TaskKind::kSegmentation: {
        const auto* m = std::get_if<SegMask>(&s.label);
        if (m == nullptr) throw Error(ErrorCode::kTaskMismatch, "expected segmentation mask");
        if (m->height != s.image.height() || m->width != s.image.width() ||
            m->cells.size() != static_cast<std::size_t>(m->height) * m->width) {
          throw Error(ErrorCode::kShapeMismatch, "mask does not match image");
        }
        for (auto v : m->cells) {
          if (v >= label_bound) throw Error(ErrorCode::kInvalidArgument, "mask id out of range");
        }
        break;
      }
    }
  }
}

}  // namespace modellock
