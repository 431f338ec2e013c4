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

// End-to-end pipeline: data, lock, train, evaluate, attack.
//
// Configuration is one JSON document. Every key is optional:
//
//   {
//     "seed": 7,
//     "output_dir": "runs/default",
//     "dataset": {"source": "shapeset", "shapeset": {...ShapeSetSpec...}}
//             or {"source": "mltd", "train": "train.mltd", "test": "test.mltd"},
//     "lock": {"prompt": "with oil pastel", "salt": "demo-lock",
//              "alpha": 0.95, "gamma": 0.5, "editor": "procedural",
//              "endpoint": null, "steps": 5, "guidance": 4.5,
//              "image_guidance": 1.5, "multilabel_policy": "clear-and-flag",
//              "trigger": null},
//     "model": {"arch": "mlp", "hidden_units": 128},
//     "train": {"epochs": 10, "batch_size": 64, "learning_rate": 0.01,
//               "momentum": 0.9},
//     "baseline": true,
//     "attacks": {"rp": false, "sp": false, "pool": "",
//                 "sp_leaked": 10, "sp_attacker_clean": 40}
//   }
//
// The MODELLOCK_SALT environment variable, when set, replaces lock.salt.
// A "trigger" object ({"kind": "badnet"|"blend"|"warp"|"filter", ...}) swaps
// the keyed editor for a backdoor trigger. Lock, init and shuffle seeds are
// derived from the global seed. "model.arch" defaults to "perpixel" for
// segmentation and "mlp" otherwise. Per-pixel weights see one pixel per image
// under a pixel-averaged loss, so their default learning rate is
// kPerPixelStep * H * W instead of train.learning_rate's default.

#ifndef MODELLOCK_EXPERIMENT_H_
#define MODELLOCK_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "modellock/attacks.h"
#include "modellock/evaluator.h"
#include "modellock/locksmith.h"
#include "modellock/shapeset.h"
#include "modellock/trainer.h"

namespace modellock {

inline constexpr const char* kSaltEnvVar = "MODELLOCK_SALT";
inline constexpr float kPerPixelStep = 1.0f;

struct AttackToggles {
  bool random_prompt = false;
  bool surrogate_prompt = false;
  // Empty selects the pool shipped with the sources.
  std::filesystem::path pool_path;
  int sp_leaked = 10;
  int sp_attacker_clean = 40;
};

struct ExperimentConfig {
  std::uint64_t seed = 7;
  std::filesystem::path output_dir = "runs/default";

  // Exactly one source: a synthetic spec or a pair of MLTD files.
  ShapeSetSpec shapeset;
  std::optional<std::filesystem::path> train_path;
  std::optional<std::filesystem::path> test_path;

  LockConfig lock;
  std::optional<TriggerSpec> trigger;
  // Dimensions and outputs are filled from the data.
  ModelSpec model;
  bool arch_given = false;
  TrainConfig train;
  bool learning_rate_given = false;
  bool baseline = true;
  AttackToggles attacks;

  // Default benchmark: ShapeSet, MLP(128), "with oil pastel" salted with
  // "demo-lock", alpha 0.95, gamma 0.5.
  static ExperimentConfig Default();
  // Starts from Default() and applies the keys present in `doc`, then the
  // salt environment override.
  static ExperimentConfig FromJson(const nlohmann::json& doc);
  // Resolved configuration. The salt is replaced by its digest.
  nlohmann::json ToJson() const;
};

ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path);

// Seeds derived from the global seed.
std::uint64_t LockSeed(const ExperimentConfig& cfg);
std::uint64_t InitSeed(const ExperimentConfig& cfg);
std::uint64_t ShuffleSeed(const ExperimentConfig& cfg);

// Checks everything that can be checked before any data is produced,
// including that alpha leaves both subsets nonempty. Throws kConfig.
void ValidateExperimentConfig(const ExperimentConfig& cfg);

struct ExperimentData {
  Dataset train;
  Dataset test;
};
ExperimentData LoadExperimentData(const ExperimentConfig& cfg);

// Model spec sized for `data` with `output_classes` outputs.
ModelSpec ResolveModelSpec(const ExperimentConfig& cfg, const Dataset& data,
                           int output_classes);

// Training config with the loss for the task, the derived shuffle seed and
// the per-pixel learning-rate default applied.
TrainConfig ResolveTrainConfig(const ExperimentConfig& cfg, const ModelSpec& spec, TaskKind task);

// Image transform used both to lock training data and to unlock test data.
ImageTransform UnlockTransform(const ExperimentConfig& cfg);

using Logger = std::function<void(std::string_view)>;

struct ExperimentReport {
  nlohmann::json doc;   // written to report.json
  std::string summary;  // written to summary.txt
};

// Runs every stage, writes artifacts under cfg.output_dir and returns the
// report. Failures are rethrown as Error with the stage name prefixed to the
// message. `baseline_override` skips clean training and reuses the given
// accuracy.
ExperimentReport RunExperiment(const ExperimentConfig& cfg, const Logger& log = {},
                               std::optional<double> baseline_override = std::nullopt);

enum class AblationParam { kGamma, kAlpha };
std::string_view AblationName(AblationParam param);
AblationParam ParseAblation(std::string_view name);

// One experiment per grid point in its own subdirectory, with the clean
// baseline trained once. Writes sweep.json and sweep.csv.
ExperimentReport Ablate(const ExperimentConfig& cfg, AblationParam param,
                        const std::vector<double>& grid, const Logger& log = {});

// Reads a report.json and checks that every artifact it lists exists and
// hashes to the recorded digest. Returns the mismatches.
std::vector<std::string> VerifyArtifacts(const std::filesystem::path& report_path);

// data/prompt_pool.json in the source tree.
std::filesystem::path DefaultPromptPoolPath();

// StableHash64 of a file's bytes, hex encoded.
std::string FileDigest(const std::filesystem::path& path);

}  // namespace modellock

#endif  // MODELLOCK_EXPERIMENT_H_
