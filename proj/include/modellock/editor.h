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

// Prompt-keyed procedural image editor and the blending operator.
//
// A key (prompt text plus optional secret salt) hashes to one of five edit
// families and a fixed-length parameter vector. Editing a dataset with a key
// then blends each original image with its edited version:
//
//   x' = (1 - gamma) * x + gamma * G(x, key)

#ifndef MODELLOCK_EDITOR_H_
#define MODELLOCK_EDITOR_H_

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "modellock/tensor.h"

namespace modellock {

class EditKey {
 public:
  // Throws kInvalidArgument on an empty prompt; use EmptyPrompt() for the
  // one caller that needs it.
  explicit EditKey(std::string prompt, std::optional<std::string> salt = std::nullopt);
  static EditKey EmptyPrompt(std::optional<std::string> salt = std::nullopt);

  const std::string& prompt() const { return prompt_; }
  const std::optional<std::string>& salt() const { return salt_; }

  // Same prompt, salt removed. This is what an attacker who guessed the
  // prompt but lacks the private editor weights would run.
  EditKey WithoutSalt() const;

  friend bool operator==(const EditKey&, const EditKey&) = default;

 private:
  EditKey() = default;
  std::string prompt_;
  std::optional<std::string> salt_;
};

enum class EditFamily : std::uint8_t {
  kColorAffine = 0,
  kTextureOverlay = 1,
  kPatchObject = 2,
  kGridWarp = 3,
  kToneCurve = 4,
};
inline constexpr int kNumEditFamilies = 5;

std::string_view FamilyName(EditFamily family);
EditFamily ParseFamily(std::string_view name);

// Parameter layout by family (unused slots are zero):
//
//   ColorAffine    [gain_r, gain_g, gain_b, bias_r, bias_g, bias_b, angle]
//                  gain in [0.6, 1.4], bias in [-0.15, 0.15], angle (hue
//                  rotation about the gray axis) in [0, pi/6]
//   TextureOverlay [amplitude, frequency, phase, orientation]
//                  amplitude in [0.15, 0.35], frequency in [2, 8] cycles per
//                  image, phase in [0, 2pi), orientation in [0, pi)
//   PatchObject    [sprite, size, corner]
//                  sprite in {0..15}, size in [0.12, 0.20] of min(H, W),
//                  corner in {0 top-left, 1 top-right, 2 bottom-left,
//                  3 bottom-right}
//   GridWarp       [grid_k, displacement, field_seed]
//                  grid_k in {8, 16, 32}, displacement in [1, 4] px,
//                  field_seed an integer in [0, 2^24)
//   ToneCurve      [exponent, saturation]
//                  exponent in [0.5, 2.0], saturation in [0.7, 1.3]
inline constexpr std::size_t kNumEditParams = 8;

struct EditParams {
  EditFamily family = EditFamily::kColorAffine;
  std::array<float, kNumEditParams> params{};
  std::uint64_t derivation_digest = 0;

  friend bool operator==(const EditParams&, const EditParams&) = default;
};

// Builds params for an explicit family/vector (used by the surrogate attack
// lattice and tests). Validates ranges and fills in the digest.
EditParams MakeEditParams(EditFamily family, std::array<float, kNumEditParams> params);
bool ParamsInRange(const EditParams& params);

EditParams DeriveEditParams(const EditKey& key);

// G(x): deterministic in (image, params, sample_seed). The seed only moves
// small jitter terms (phase, sub-pixel shifts), never the family or strength.
Image ApplyEdit(const Image& image, const EditParams& params, std::uint64_t sample_seed);

// Elementwise (1 - gamma) * original + gamma * edited, clamped. Exact at
// gamma 0 and 1.
Image Blend(const Image& original, const Image& edited, float gamma);

struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open
  bool Contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};
// Region PatchObject writes for a given image size and sample seed.
PixelRect PatchObjectRect(const EditParams& params, int height, int width,
                          std::uint64_t sample_seed);

// Displacement field of a k x k control grid with displacements up to
// `max_displacement` px, bilinearly upsampled, applied with bilinear
// resampling and clamp-to-edge. Shared by GridWarp and the warp trigger.
Image WarpImage(const Image& image, int grid_k, float max_displacement,
                std::uint64_t field_seed, float shift_x = 0.0f, float shift_y = 0.0f);

enum class EditorKind { kProcedural, kExternal };

struct EditorConfig {
  EditorKind kind = EditorKind::kProcedural;
  float gamma = 0.5f;
  // Carried on the wire for diffusion backends; the procedural editor
  // ignores them.
  int steps = 5;
  float guidance = 4.5f;
  float image_guidance = 1.5f;
  // "http://host:port" or "stdio:<command line>". External only.
  std::optional<std::string> endpoint;
};

void ValidateEditorConfig(const EditorConfig& cfg);

// Per-sample image transform, keyed by sample seed.
using ImageTransform = std::function<Image(const Image&, std::uint64_t)>;

// Returns x -> blend(x, G(x, key), gamma) for the configured editor. Key
// parameters are derived once.
ImageTransform MakeKeyedTransform(const EditKey& key, const EditorConfig& cfg);
// Same with explicit procedural parameters instead of a key.
ImageTransform MakeParamsTransform(const EditParams& params, float gamma);

Image EditWithKey(const Image& image, const EditKey& key, const EditorConfig& cfg,
                  std::uint64_t sample_seed);

}  // namespace modellock

#endif  // MODELLOCK_EDITOR_H_
