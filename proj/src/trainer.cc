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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "byte_io.h"
#include "modellock/error.h"
#include "modellock/hashing.h"
#include "modellock/mltd.h"

namespace modellock {
namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstVectorMap = Eigen::Map<const Eigen::RowVectorXd>;
using VectorMap = Eigen::Map<Eigen::RowVectorXd>;

constexpr int kNeighborhood = 9;  // 3x3 window for per-pixel models
constexpr std::uint64_t kInitStream = 0x1A17ULL;
constexpr std::uint64_t kShuffleStream = 0x5B0FF1EULL;

int PixelFeatures(const ModelSpec& spec) { return kNeighborhood * spec.channels; }

void CheckImage(const ModelSpec& spec, const Image& image) {
  if (image.height() != spec.height || image.width() != spec.width ||
      image.channels() != spec.channels) {
    throw Error(ErrorCode::kShapeMismatch,
                "image " + std::to_string(image.height()) + "x" + std::to_string(image.width()) +
                    "x" + std::to_string(image.channels()) + " does not match model input " +
                    std::to_string(spec.height) + "x" + std::to_string(spec.width) + "x" +
                    std::to_string(spec.channels));
  }
}

// Rows are images with pixels shifted to [-0.5, 0.5].
Matrix InputMatrix(const ModelSpec& spec, std::span<const Image* const> images) {
  Matrix x(static_cast<Eigen::Index>(images.size()), spec.input_size());
  for (std::size_t b = 0; b < images.size(); ++b) {
    CheckImage(spec, *images[b]);
    const auto data = images[b]->data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      x(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(i)) = data[i] - 0.5;
    }
  }
  return x;
}

// 3x3 neighborhood features of pixel (y, x), zero outside the image.
void GatherNeighborhood(const ModelSpec& spec, const double* row, int y, int x, double* out) {
  const int c = spec.channels;
  int k = 0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      const int yy = y + dy, xx = x + dx;
      const bool inside = yy >= 0 && yy < spec.height && xx >= 0 && xx < spec.width;
      for (int ch = 0; ch < c; ++ch) {
        out[k++] = inside ? row[(static_cast<std::size_t>(yy) * spec.width + xx) * c + ch] : 0.0;
      }
    }
  }
}

struct Activations {
  Matrix hidden_pre;  // MLP only
  Matrix hidden;      // MLP only
  Matrix logits;      // B x K, or B x (HW*K) for per-pixel
};

Activations ForwardCore(const ModelSpec& spec, std::span<const double> w, const Matrix& x) {
  const Eigen::Index d = spec.input_size();
  const Eigen::Index k = spec.output_classes;
  Activations act;
  switch (spec.arch) {
    case Arch::kLinear: {
      ConstMatrixMap weight(w.data(), k, d);
      ConstVectorMap bias(w.data() + k * d, k);
      act.logits = x * weight.transpose();
      act.logits.rowwise() += bias;
      break;
    }
    case Arch::kMlp: {
      const Eigen::Index h = spec.hidden_units;
      ConstMatrixMap w1(w.data(), h, d);
      ConstVectorMap b1(w.data() + h * d, h);
      ConstMatrixMap w2(w.data() + h * d + h, k, h);
      ConstVectorMap b2(w.data() + h * d + h + k * h, k);
      act.hidden_pre = x * w1.transpose();
      act.hidden_pre.rowwise() += b1;
      act.hidden = act.hidden_pre.cwiseMax(0.0);
      act.logits = act.hidden * w2.transpose();
      act.logits.rowwise() += b2;
      break;
    }
    case Arch::kPerPixelLinear: {
      const int f = PixelFeatures(spec);
      const std::size_t pixels = static_cast<std::size_t>(spec.height) * spec.width;
      const double* bias = w.data() + pixels * k * f;
      act.logits.resize(x.rows(), static_cast<Eigen::Index>(pixels) * k);
      std::vector<double> feat(f);
      for (Eigen::Index b = 0; b < x.rows(); ++b) {
        const double* row = x.row(b).data();
        for (int y = 0; y < spec.height; ++y) {
          for (int xx = 0; xx < spec.width; ++xx) {
            const std::size_t p = static_cast<std::size_t>(y) * spec.width + xx;
            GatherNeighborhood(spec, row, y, xx, feat.data());
            for (Eigen::Index c = 0; c < k; ++c) {
              const double* wr = w.data() + (p * k + c) * f;
              double acc = bias[p * k + c];
              for (int j = 0; j < f; ++j) acc += wr[j] * feat[j];
              act.logits(b, static_cast<Eigen::Index>(p * k + c)) = acc;
            }
          }
        }
      }
      break;
    }
  }
  return act;
}

// Softmax cross-entropy over `k` logits starting at `z`; writes
// d(loss)/d(logits) * scale into `dz`.
double SoftmaxXent(const double* z, int k, int target, double scale, double* dz) {
  const double mx = *std::max_element(z, z + k);
  double sum = 0.0;
  for (int i = 0; i < k; ++i) sum += std::exp(z[i] - mx);
  const double log_sum = mx + std::log(sum);
  for (int i = 0; i < k; ++i) {
    dz[i] = (std::exp(z[i] - log_sum) - (i == target ? 1.0 : 0.0)) * scale;
  }
  return log_sum - z[target];
}

// Numerically stable binary cross-entropy with logits.
double BinaryXent(double z, double t) {
  return std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
}

double Sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

void CheckLossMatchesArch(const ModelSpec& spec, LossKind loss) {
  const bool per_pixel = spec.arch == Arch::kPerPixelLinear;
  if (per_pixel != (loss == LossKind::kPerPixelSoftmaxCrossEntropy)) {
    throw Error(ErrorCode::kTaskMismatch,
                std::string("loss ") + std::string(LossName(loss)) + " is incompatible with arch " +
                    std::string(ArchName(spec.arch)));
  }
}

// Fills `dlogits` (same shape as logits) and returns the mean loss.
double LossAndLogitGrad(const ModelSpec& spec, const Matrix& logits,
                        std::span<const Sample* const> batch, LossKind loss, Matrix& dlogits) {
  const int k = spec.output_classes;
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  dlogits.resize(logits.rows(), logits.cols());
  double total = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto row = static_cast<Eigen::Index>(b);
    const Label& label = batch[b]->label;
    switch (loss) {
      case LossKind::kSoftmaxCrossEntropy: {
        const auto* c = std::get_if<ClassId>(&label);
        if (c == nullptr) throw Error(ErrorCode::kTaskMismatch, "softmax loss needs class labels");
        if (c->value >= static_cast<std::uint32_t>(k)) {
          throw Error(ErrorCode::kInvalidArgument, "class id exceeds model outputs");
        }
        total += SoftmaxXent(logits.row(row).data(), k, static_cast<int>(c->value), inv_b,
                             dlogits.row(row).data());
        break;
      }
      case LossKind::kPerLabelBinaryCrossEntropy: {
        const auto* m = std::get_if<MultiLabel>(&label);
        if (m == nullptr) throw Error(ErrorCode::kTaskMismatch, "binary loss needs multi-labels");
        if (m->bits.size() > static_cast<std::size_t>(k)) {
          throw Error(ErrorCode::kInvalidArgument, "multi-label longer than model outputs");
        }
        const double scale = inv_b / k;
        for (int i = 0; i < k; ++i) {
          // Labels without the appended lock bit read it as 0.
          const double t = (static_cast<std::size_t>(i) < m->bits.size() && m->bits[i]) ? 1.0 : 0.0;
          const double z = logits(row, i);
          total += BinaryXent(z, t) / k;
          dlogits(row, i) = (Sigmoid(z) - t) * scale;
        }
        break;
      }
      case LossKind::kPerPixelSoftmaxCrossEntropy: {
        const auto* m = std::get_if<SegMask>(&label);
        if (m == nullptr) throw Error(ErrorCode::kTaskMismatch, "per-pixel loss needs masks");
        if (m->height != spec.height || m->width != spec.width) {
          throw Error(ErrorCode::kShapeMismatch, "mask does not match model input");
        }
        const std::size_t pixels = m->cells.size();
        const double scale = inv_b / static_cast<double>(pixels);
        double sample_loss = 0.0;
        for (std::size_t p = 0; p < pixels; ++p) {
          if (m->cells[p] >= k) throw Error(ErrorCode::kInvalidArgument, "mask id exceeds outputs");
          const auto off = static_cast<Eigen::Index>(p * k);
          sample_loss += SoftmaxXent(logits.row(row).data() + off, k, m->cells[p], scale,
                                     dlogits.row(row).data() + off);
        }
        total += sample_loss / static_cast<double>(pixels);
        break;
      }
    }
  }
  return total * inv_b;
}

void BackwardCore(const ModelSpec& spec, std::span<const double> w, const Matrix& x,
                  const Activations& act, const Matrix& dlogits, std::vector<double>& grad) {
  const Eigen::Index d = spec.input_size();
  const Eigen::Index k = spec.output_classes;
  grad.assign(WeightCount(spec), 0.0);
  switch (spec.arch) {
    case Arch::kLinear: {
      MatrixMap gw(grad.data(), k, d);
      VectorMap gb(grad.data() + k * d, k);
      gw.noalias() = dlogits.transpose() * x;
      gb = dlogits.colwise().sum();
      break;
    }
    case Arch::kMlp: {
      const Eigen::Index h = spec.hidden_units;
      ConstMatrixMap w2(w.data() + h * d + h, k, h);
      MatrixMap gw1(grad.data(), h, d);
      VectorMap gb1(grad.data() + h * d, h);
      MatrixMap gw2(grad.data() + h * d + h, k, h);
      VectorMap gb2(grad.data() + h * d + h + k * h, k);
      gw2.noalias() = dlogits.transpose() * act.hidden;
      gb2 = dlogits.colwise().sum();
      Matrix dhidden = dlogits * w2;
      dhidden = dhidden.cwiseProduct((act.hidden_pre.array() > 0.0).cast<double>().matrix());
      gw1.noalias() = dhidden.transpose() * x;
      gb1 = dhidden.colwise().sum();
      break;
    }
    case Arch::kPerPixelLinear: {
      const int f = PixelFeatures(spec);
      const std::size_t pixels = static_cast<std::size_t>(spec.height) * spec.width;
      double* gbias = grad.data() + pixels * k * f;
      std::vector<double> feat(f);
      for (Eigen::Index b = 0; b < x.rows(); ++b) {
        const double* row = x.row(b).data();
        for (int y = 0; y < spec.height; ++y) {
          for (int xx = 0; xx < spec.width; ++xx) {
            const std::size_t p = static_cast<std::size_t>(y) * spec.width + xx;
            GatherNeighborhood(spec, row, y, xx, feat.data());
            for (Eigen::Index c = 0; c < k; ++c) {
              const double g = dlogits(b, static_cast<Eigen::Index>(p * k + c));
              if (g == 0.0) continue;
              double* gw = grad.data() + (p * k + c) * f;
              for (int j = 0; j < f; ++j) gw[j] += g * feat[j];
              gbias[p * k + c] += g;
            }
          }
        }
      }
      break;
    }
  }
}

std::vector<double> ToDouble(std::span<const float> w) { return {w.begin(), w.end()}; }

std::vector<const Image*> ImagesOf(std::span<const Sample* const> batch) {
  std::vector<const Image*> images;
  images.reserve(batch.size());
  for (const Sample* s : batch) images.push_back(&s->image);
  return images;
}

}  // namespace

std::string_view ArchName(Arch arch) {
  switch (arch) {
    case Arch::kLinear: return "linear";
    case Arch::kMlp: return "mlp";
    case Arch::kPerPixelLinear: return "perpixel";
  }
  return "unknown";
}

Arch ParseArch(std::string_view name) {
  if (name == "linear") return Arch::kLinear;
  if (name == "mlp") return Arch::kMlp;
  if (name == "perpixel" || name == "per-pixel-linear") return Arch::kPerPixelLinear;
  throw Error(ErrorCode::kInvalidArgument, "unknown arch '" + std::string(name) + "'");
}

std::string_view LossName(LossKind loss) {
  switch (loss) {
    case LossKind::kSoftmaxCrossEntropy: return "softmax-xent";
    case LossKind::kPerLabelBinaryCrossEntropy: return "binary-xent";
    case LossKind::kPerPixelSoftmaxCrossEntropy: return "pixel-softmax-xent";
  }
  return "unknown";
}

LossKind ParseLoss(std::string_view name) {
  for (auto l : {LossKind::kSoftmaxCrossEntropy, LossKind::kPerLabelBinaryCrossEntropy,
                 LossKind::kPerPixelSoftmaxCrossEntropy}) {
    if (LossName(l) == name) return l;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown loss '" + std::string(name) + "'");
}

LossKind DefaultLossFor(TaskKind task) {
  switch (task) {
    case TaskKind::kClassification: return LossKind::kSoftmaxCrossEntropy;
    case TaskKind::kMultiLabel: return LossKind::kPerLabelBinaryCrossEntropy;
    case TaskKind::kSegmentation: return LossKind::kPerPixelSoftmaxCrossEntropy;
  }
  return LossKind::kSoftmaxCrossEntropy;
}

void ValidateModelSpec(const ModelSpec& spec) {
  if (spec.height <= 0 || spec.width <= 0 || (spec.channels != 1 && spec.channels != 3)) {
    throw Error(ErrorCode::kConfig, "model input dimensions are invalid");
  }
  if (spec.output_classes < 2) throw Error(ErrorCode::kConfig, "output_classes must be >= 2");
  if (spec.arch == Arch::kMlp && spec.hidden_units <= 0) {
    throw Error(ErrorCode::kConfig, "MLP needs hidden_units > 0");
  }
}

std::size_t WeightCount(const ModelSpec& spec) {
  const std::size_t d = static_cast<std::size_t>(spec.input_size());
  const std::size_t k = static_cast<std::size_t>(spec.output_classes);
  switch (spec.arch) {
    case Arch::kLinear: return d * k + k;
    case Arch::kMlp: {
      const std::size_t h = static_cast<std::size_t>(spec.hidden_units);
      return d * h + h + h * k + k;
    }
    case Arch::kPerPixelLinear: {
      const std::size_t pixels = static_cast<std::size_t>(spec.height) * spec.width;
      return pixels * k * PixelFeatures(spec) + pixels * k;
    }
  }
  return 0;
}

Model InitModel(const ModelSpec& spec) {
  ValidateModelSpec(spec);
  Model model{spec, std::vector<float>(WeightCount(spec), 0.0f)};
  const CounterRng rng(MixSeed(spec.init_seed, kInitStream));
  auto fill = [&](std::size_t offset, std::size_t count, int fan_in) {
    const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i) {
      model.weights[offset + i] = static_cast<float>(rng.Uniform(offset + i, -limit, limit));
    }
  };
  const std::size_t d = static_cast<std::size_t>(spec.input_size());
  const std::size_t k = static_cast<std::size_t>(spec.output_classes);
  switch (spec.arch) {
    case Arch::kLinear:
      fill(0, k * d, static_cast<int>(d));
      break;
    case Arch::kMlp: {
      const std::size_t h = static_cast<std::size_t>(spec.hidden_units);
      fill(0, h * d, static_cast<int>(d));
      fill(h * d + h, k * h, static_cast<int>(h));
      break;
    }
    case Arch::kPerPixelLinear: {
      const std::size_t pixels = static_cast<std::size_t>(spec.height) * spec.width;
      fill(0, pixels * k * PixelFeatures(spec), PixelFeatures(spec));
      break;
    }
  }
  return model;
}

std::vector<float> Forward(const Model& model, const Image& image) {
  const std::vector<double> w = ToDouble(model.weights);
  const Image* images[] = {&image};
  const Matrix x = InputMatrix(model.spec, images);
  const Activations act = ForwardCore(model.spec, w, x);
  return {act.logits.data(), act.logits.data() + act.logits.size()};
}

std::vector<std::vector<float>> ForwardAll(const Model& model, const Dataset& dataset) {
  const std::vector<double> w = ToDouble(model.weights);
  std::vector<std::vector<float>> out;
  out.reserve(dataset.size());
  constexpr std::size_t kChunk = 256;
  for (std::size_t start = 0; start < dataset.size(); start += kChunk) {
    const std::size_t end = std::min(dataset.size(), start + kChunk);
    std::vector<const Image*> images;
    for (std::size_t i = start; i < end; ++i) images.push_back(&dataset.samples[i].image);
    const Activations act = ForwardCore(model.spec, w, InputMatrix(model.spec, images));
    for (Eigen::Index r = 0; r < act.logits.rows(); ++r) {
      out.emplace_back(act.logits.row(r).data(), act.logits.row(r).data() + act.logits.cols());
    }
  }
  return out;
}

LossGrad LossAndGrad(const ModelSpec& spec, std::span<const double> weights,
                     std::span<const Sample* const> batch, LossKind loss) {
  if (weights.size() != WeightCount(spec)) {
    throw Error(ErrorCode::kShapeMismatch, "weight vector length does not match spec");
  }
  if (batch.empty()) throw Error(ErrorCode::kInvalidArgument, "empty batch");
  CheckLossMatchesArch(spec, loss);
  const std::vector<const Image*> images = ImagesOf(batch);
  const Matrix x = InputMatrix(spec, images);
  const Activations act = ForwardCore(spec, weights, x);
  Matrix dlogits;
  LossGrad out;
  out.loss = LossAndLogitGrad(spec, act.logits, batch, loss, dlogits);
  BackwardCore(spec, weights, x, act, dlogits, out.grad);
  return out;
}

LossGrad LossAndGrad(const Model& model, std::span<const Sample* const> batch, LossKind loss) {
  const std::vector<double> w = ToDouble(model.weights);
  return LossAndGrad(model.spec, w, batch, loss);
}

double DatasetLoss(const Model& model, const Dataset& dataset, LossKind loss) {
  if (dataset.samples.empty()) return 0.0;
  CheckLossMatchesArch(model.spec, loss);
  const std::vector<double> w = ToDouble(model.weights);
  constexpr std::size_t kChunk = 256;
  double total = 0.0;
  for (std::size_t start = 0; start < dataset.size(); start += kChunk) {
    const std::size_t end = std::min(dataset.size(), start + kChunk);
    std::vector<const Sample*> batch;
    for (std::size_t i = start; i < end; ++i) batch.push_back(&dataset.samples[i]);
    const Matrix x = InputMatrix(model.spec, ImagesOf(batch));
    const Activations act = ForwardCore(model.spec, w, x);
    Matrix dlogits;
    total += LossAndLogitGrad(model.spec, act.logits, batch, loss, dlogits) *
             static_cast<double>(batch.size());
  }
  return total / static_cast<double>(dataset.size());
}

nlohmann::json TrainConfig::ToJson() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"momentum", momentum},
          {"shuffle_seed", shuffle_seed},
          {"loss", LossName(loss)}};
}

void ValidateTrainConfig(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0f)) throw Error(ErrorCode::kConfig, "learning_rate must be > 0");
  if (cfg.epochs < 0) throw Error(ErrorCode::kConfig, "epochs must be >= 0");
  if (cfg.batch_size <= 0) throw Error(ErrorCode::kConfig, "batch_size must be > 0");
  if (!(cfg.momentum >= 0.0f && cfg.momentum < 1.0f)) {
    throw Error(ErrorCode::kConfig, "momentum must lie in [0, 1)");
  }
}

TrainResult Train(const Model& initial, const Dataset& dataset, const TrainConfig& cfg) {
  ValidateTrainConfig(cfg);
  if (dataset.samples.empty()) throw Error(ErrorCode::kInvalidArgument, "empty training set");
  if (DefaultLossFor(dataset.task) != cfg.loss) {
    throw Error(ErrorCode::kTaskMismatch, std::string("loss ") + std::string(LossName(cfg.loss)) +
                                              " does not fit task " +
                                              std::string(TaskName(dataset.task)));
  }
  std::vector<double> w = ToDouble(initial.weights);
  std::vector<double> velocity(w.size(), 0.0);
  TrainResult result;
  const std::size_t n = dataset.size();
  std::vector<std::size_t> order(n);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    const CounterRng rng(MixSeed(MixSeed(cfg.shuffle_seed, kShuffleStream), epoch));
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.Below(i, i + 1)]);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<const Sample*> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) batch.push_back(&dataset.samples[order[i]]);
      const LossGrad lg = LossAndGrad(initial.spec, w, batch, cfg.loss);
      epoch_loss += lg.loss * static_cast<double>(batch.size());
      for (std::size_t i = 0; i < w.size(); ++i) {
        velocity[i] = cfg.momentum * velocity[i] - cfg.learning_rate * lg.grad[i];
        w[i] += velocity[i];
      }
    }
    result.loss_curve.push_back(epoch_loss / static_cast<double>(n));
  }
  result.model.spec = initial.spec;
  result.model.weights.assign(w.begin(), w.end());
  return result;
}

nlohmann::json ModelSpecToJson(const ModelSpec& spec) {
  return {{"arch", ArchName(spec.arch)},
          {"hidden_units", spec.hidden_units},
          {"height", spec.height},
          {"width", spec.width},
          {"channels", spec.channels},
          {"output_classes", spec.output_classes},
          {"init_seed", spec.init_seed}};
}

ModelSpec ModelSpecFromJson(const nlohmann::json& doc) {
  try {
    ModelSpec spec;
    spec.arch = ParseArch(doc.at("arch").get<std::string>());
    spec.hidden_units = doc.value("hidden_units", 128);
    spec.height = doc.at("height").get<int>();
    spec.width = doc.at("width").get<int>();
    spec.channels = doc.at("channels").get<int>();
    spec.output_classes = doc.at("output_classes").get<int>();
    spec.init_seed = doc.value("init_seed", std::uint64_t{0});
    ValidateModelSpec(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("bad model spec: ") + e.what());
  }
}

void SaveCheckpoint(const Model& model, const nlohmann::json& header_extra,
                    const std::filesystem::path& path) {
  nlohmann::json header = header_extra.is_object() ? header_extra : nlohmann::json::object();
  header["format"] = "modellock-checkpoint";
  header["version"] = 1;
  header["spec"] = ModelSpecToJson(model.spec);
  internal::ByteWriter w;
  const std::string line = header.dump() + "\n";
  w.PutBytes(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(line.data()),
                                           line.size()));
  w.Put<std::uint64_t>(model.weights.size());
  w.PutFloats(model.weights);
  const std::uint32_t crc = Crc32(w.bytes());
  w.Put<std::uint32_t>(crc);
  WriteFileBytes(path, w.bytes());
}

Model LoadCheckpoint(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = ReadFileBytes(path);
  const auto nl = std::find(bytes.begin(), bytes.end(), '\n');
  if (nl == bytes.end()) throw Error(ErrorCode::kFormat, "checkpoint has no header line");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin(), nl);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("checkpoint header: ") + e.what());
  }
  if (header.value("format", std::string()) != "modellock-checkpoint" ||
      header.value("version", 0) != 1) {
    throw Error(ErrorCode::kFormat, "not a version 1 modellock checkpoint");
  }
  Model model;
  model.spec = ModelSpecFromJson(header.at("spec"));
  const std::size_t body = static_cast<std::size_t>(nl - bytes.begin()) + 1;
  internal::ByteReader r(std::span<const std::uint8_t>(bytes).subspan(body));
  const auto count = r.Get<std::uint64_t>();
  if (count != WeightCount(model.spec)) {
    throw Error(ErrorCode::kFormat, "weight count does not match the model spec");
  }
  model.weights = r.GetFloats(count);
  const std::size_t payload_end = body + r.position();
  const auto stored = r.Get<std::uint32_t>();
  if (r.remaining() != 0) throw Error(ErrorCode::kFormat, "trailing bytes in checkpoint");
  if (stored != Crc32(std::span<const std::uint8_t>(bytes).first(payload_end))) {
    throw Error(ErrorCode::kChecksum, "checkpoint CRC-32 mismatch");
  }
  return model;
}

}  // namespace modellock
