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

// Unlocking attacks against a locked model and backdoor-trigger locks.
//
// Attack entry points take only what an attacker is allowed to hold: the
// locked model, public editor settings, test data and (for the surrogate
// attack) a handful of leaked edited images. None of them accept the
// defender's key.

#ifndef MODELLOCK_ATTACKS_H_
#define MODELLOCK_ATTACKS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "modellock/editor.h"
#include "modellock/evaluator.h"
#include "modellock/locksmith.h"
#include "modellock/tensor.h"
#include "modellock/trainer.h"

namespace modellock {

inline constexpr std::array<std::string_view, 5> kPromptCategories = {
    "random-objects", "style-transfer", "traditional-adjustment", "empty",
    "meaningless-strings"};

// {"categories": {"<category>": ["prompt", ...], ...}}. Categories outside
// kPromptCategories are rejected; the empty string is only legal under
// "empty".
struct PromptPool {
  struct Entry {
    std::string category;
    std::string prompt;
  };
  std::vector<Entry> entries;  // category order of kPromptCategories

  static PromptPool FromJson(const nlohmann::json& doc);
  nlohmann::json ToJson() const;
};

PromptPool LoadPromptPool(const std::filesystem::path& path);

struct AttackKey {
  std::string category;
  EditKey key;
};

// Unsalted keys for every pool prompt: the attacker runs the public editor.
std::vector<AttackKey> PoolKeys(const PromptPool& pool);

struct RpEntry {
  std::string category;
  std::string prompt;
  bool salted = false;
  std::string family;  // "external" for non-procedural editors
  double up_rp = 0.0;
};

struct RpResult {
  std::vector<RpEntry> entries;
  double max_up = 0.0;
  double mean_up = 0.0;

  std::string Csv() const;
  nlohmann::json Summary() const;
};

// UP of the locked model when unlocking with each key in turn. `seed` is the
// evaluation seed, identical to the one used for the legitimate UP.
RpResult RandomPromptAttack(const Model& model, const Dataset& clean_test,
                            const std::vector<AttackKey>& keys, const EditorConfig& public_editor,
                            std::uint64_t seed);

inline constexpr int kHistogramBins = 32;

// Per-channel 32-bin histograms over [0, 1], each normalized to sum 1,
// concatenated channel by channel.
std::vector<double> ChannelHistograms(std::span<const Image> images);
std::vector<double> ChannelHistograms(const Dataset& dataset);
// L1 distance of one channel's histograms.
double HistogramL1(std::span<const double> a, std::span<const double> b, int channel);
// Sum of the per-channel L1 distances.
double HistogramDistance(std::span<const double> a, std::span<const double> b);

// Candidate transforms searched by the surrogate attack (1938 points):
//   ColorAffine    gains {0.7, 1.0, 1.3}^3 x biases {-0.1, 0, 0.1}^3 x
//                  angle {0, pi/12}
//   TextureOverlay amplitude {0.2, 0.3} x frequency {2, 4, 6, 8} x
//                  phase {0, pi/2, pi, 3pi/2} x orientation {0, pi/4, pi/2, 3pi/4}
//   PatchObject    sprite 0..15 x size {0.12, 0.16, 0.20} x corner 0..3
//   GridWarp       k {8, 16, 32} x displacement {2, 4} x field seed 0..7
//   ToneCurve      exponent 0.5..2.0 step 0.1 x saturation 0.7..1.3 step 0.1
// Families appear in enum order, last listed parameter varying fastest.
std::vector<EditParams> SurrogateLattice();

struct SpResult {
  EditParams fitted;
  std::size_t fitted_index = 0;
  double fitted_score = 0.0;
  double up_sp = 0.0;
  std::vector<double> scores;  // per lattice index

  std::string Csv(const std::vector<EditParams>& lattice) const;
  nlohmann::json Summary() const;
};

// Fits the lattice point whose edits of `attacker_clean` best match the
// histograms of `leaked`, then reports UP on `clean_test` unlocked with it.
// Edits use public_editor.gamma and seeds from (seed, id). Ties go to the
// lowest lattice index. Throws kInvalidArgument when nothing leaked.
SpResult SurrogatePromptAttack(const Model& model, std::span<const Image> leaked,
                               const Dataset& attacker_clean, const Dataset& clean_test,
                               const EditorConfig& public_editor, std::uint64_t seed);

enum class TriggerKind { kPatchBadnet, kBlendPattern, kWarpGrid, kFixedFilter };

struct TriggerSpec {
  TriggerKind kind = TriggerKind::kBlendPattern;
  int size_px = 5;      // PatchBadnet
  float ratio = 0.2f;   // BlendPattern weight of the pattern image
  int grid_k = 32;      // WarpGrid

  static TriggerSpec PatchBadnet(int size_px);
  static TriggerSpec BlendPattern(float ratio);
  static TriggerSpec WarpGrid(int grid_k);
  static TriggerSpec FixedFilter();

  std::string Name() const;
  nlohmann::json ToJson() const;
  static TriggerSpec FromJson(const nlohmann::json& doc);
};

void ValidateTriggerSpec(const TriggerSpec& spec);

inline constexpr std::uint64_t kBlendPatternSeed = 0xB1E4D;

// Uniform noise image drawn from kBlendPatternSeed.
Image BlendPatternImage(int height, int width, int channels);

// PatchBadnet: black/white checkerboard square in the bottom-right corner.
// BlendPattern: (1 - ratio) * x + ratio * pattern.
// WarpGrid: fixed smooth k x k control-grid warp.
// FixedFilter: fixed gamma/saturation tone curve.
// Triggers ignore the sample seed.
Image ApplyTrigger(const Image& image, const TriggerSpec& spec);
ImageTransform TriggerTransform(const TriggerSpec& spec);

// Same partition and relabeling contract as LockDataset with the trigger in
// place of the keyed editor.
LockedDataset BackdoorLockDataset(const Dataset& dataset, const TriggerSpec& trigger, float alpha,
                                  std::uint64_t seed, const LockLabelPolicy& policy = {});

// Quotes a CSV field when it contains a comma, quote or line break.
std::string CsvField(std::string_view text);

}  // namespace modellock

#endif  // MODELLOCK_ATTACKS_H_
