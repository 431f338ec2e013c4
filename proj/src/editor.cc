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

#include "modellock/editor.h"

#include <sodium.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "modellock/error.h"
#include "modellock/external_editor.h"
#include "modellock/hashing.h"

namespace modellock {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kJitterStream = 0x4A177E5ULL;
constexpr std::uint64_t kSpriteStream = 0x5B41E000ULL;
constexpr int kSpriteCells = 8;
constexpr int kNumSprites = 16;
constexpr int kGridChoices[] = {8, 16, 32};

// BLAKE2b-64 of the prompt, followed by a zero byte and the salt when one is
// set. The separator keeps ("ab", "c") and ("a", "bc") apart.
std::uint64_t KeyHash(const EditKey& key) {
  static const int sodium_ready = sodium_init();
  (void)sodium_ready;
  std::string input = key.prompt();
  if (key.salt()) {
    input.push_back('\0');
    input += *key.salt();
  }
  std::array<unsigned char, 8> out{};
  crypto_generichash(out.data(), out.size(), reinterpret_cast<const unsigned char*>(input.data()),
                     input.size(), nullptr, 0);
  std::uint64_t h = 0;
  for (int i = 7; i >= 0; --i) h = (h << 8) | out[i];
  return h;
}

std::uint64_t ParamsDigest(EditFamily family,
                           const std::array<float, kNumEditParams>& params) {
  std::vector<std::uint8_t> bytes(1 + sizeof(float) * kNumEditParams);
  bytes[0] = static_cast<std::uint8_t>(family);
  std::memcpy(bytes.data() + 1, params.data(), sizeof(float) * kNumEditParams);
  return StableHash64(bytes);
}

bool Within(float v, double lo, double hi) {
  constexpr double kSlack = 1e-6;
  return v >= lo - kSlack && v <= hi + kSlack;
}

bool IsInteger(float v) { return std::floor(v) == v; }

std::array<float, 3> SpriteColor(int sprite) {
  // Fully saturated hue wheel, 16 stops.
  const double h = 6.0 * sprite / kNumSprites;
  const int sector = static_cast<int>(h) % 6;
  const auto f = static_cast<float>(h - std::floor(h));
  switch (sector) {
    case 0: return {1.0f, f, 0.0f};
    case 1: return {1.0f - f, 1.0f, 0.0f};
    case 2: return {0.0f, 1.0f, f};
    case 3: return {0.0f, 1.0f - f, 1.0f};
    case 4: return {f, 0.0f, 1.0f};
    default: return {1.0f, 0.0f, 1.0f - f};
  }
}

// Left-right symmetric 8x8 glyph.
bool SpriteCell(int sprite, int row, int col) {
  const CounterRng rng(kSpriteStream + static_cast<std::uint64_t>(sprite));
  const int half_col = col < kSpriteCells / 2 ? col : kSpriteCells - 1 - col;
  return rng.Uniform(static_cast<std::uint64_t>(row * (kSpriteCells / 2) + half_col)) < 0.55;
}

Image ColorAffine(const Image& image, const EditParams& p, const CounterRng& jitter) {
  const int c = image.channels();
  const auto& v = p.params;
  std::array<double, 3> bias{};
  // Jitter scales the bias, so identity parameters stay an exact identity.
  for (int i = 0; i < 3; ++i) bias[i] = v[3 + i] * jitter.Uniform(i, 0.9, 1.1);

  // Rodrigues rotation about the unit gray axis.
  const double theta = v[6];
  const double cs = std::cos(theta), sn = std::sin(theta);
  const double u = 1.0 / std::sqrt(3.0);
  const double k = (1.0 - cs) * u * u;
  const double rot[3][3] = {
      {cs + k, k - sn * u, k + sn * u},
      {k + sn * u, cs + k, k - sn * u},
      {k - sn * u, k + sn * u, cs + k},
  };

  std::vector<float> out(image.size());
  const auto in = image.data();
  const std::size_t pixels = static_cast<std::size_t>(image.height()) * image.width();
  for (std::size_t px = 0; px < pixels; ++px) {
    if (c == 1) {
      out[px] = static_cast<float>(v[0] * in[px] + bias[0]);
      continue;
    }
    const float* rgb = &in[px * 3];
    for (int ch = 0; ch < 3; ++ch) {
      const double mixed = rot[ch][0] * rgb[0] + rot[ch][1] * rgb[1] + rot[ch][2] * rgb[2];
      out[px * 3 + ch] = static_cast<float>(v[ch] * mixed + bias[ch]);
    }
  }
  return Image::Clamped(image.height(), image.width(), c, std::move(out));
}

Image TextureOverlay(const Image& image, const EditParams& p, const CounterRng& jitter) {
  const double amplitude = p.params[0];
  const double frequency = p.params[1];
  const double phase = p.params[2] + jitter.Uniform(0, -0.15, 0.15);
  const double orient = p.params[3];
  const double dir_x = std::cos(orient), dir_y = std::sin(orient);
  const int h = image.height(), w = image.width(), c = image.channels();

  std::vector<float> out(image.data().begin(), image.data().end());
  for (int y = 0; y < h; ++y) {
    const double v = (y + 0.5) / h;
    for (int x = 0; x < w; ++x) {
      const double u = (x + 0.5) / w;
      const double wave =
          amplitude * std::sin(2.0 * kPi * frequency * (u * dir_x + v * dir_y) + phase);
      for (int ch = 0; ch < c; ++ch) {
        float& px = out[(static_cast<std::size_t>(y) * w + x) * c + ch];
        px = static_cast<float>(px + wave);
      }
    }
  }
  return Image::Clamped(h, w, c, std::move(out));
}

Image PatchObject(const Image& image, const EditParams& p, std::uint64_t sample_seed) {
  const int sprite = static_cast<int>(p.params[0]);
  const PixelRect rect = PatchObjectRect(p, image.height(), image.width(), sample_seed);
  const int size = rect.x1 - rect.x0;
  const auto color = SpriteColor(sprite);
  const int w = image.width(), c = image.channels();

  std::vector<float> out(image.data().begin(), image.data().end());
  for (int y = rect.y0; y < rect.y1; ++y) {
    const int row = (y - rect.y0) * kSpriteCells / size;
    for (int x = rect.x0; x < rect.x1; ++x) {
      const int col = (x - rect.x0) * kSpriteCells / size;
      // Lit cells take the sprite color lifted into [0.45, 1], the rest are
      // black ink, so every channel of the patch leaves the background level.
      const bool lit = SpriteCell(sprite, row, col);
      float* px = &out[(static_cast<std::size_t>(y) * w + x) * c];
      auto shade = [lit](float v) { return lit ? 0.45f + 0.55f * v : 0.0f; };
      if (c == 1) {
        px[0] = shade(0.299f * color[0] + 0.587f * color[1] + 0.114f * color[2]);
      } else {
        for (int ch = 0; ch < 3; ++ch) px[ch] = shade(color[ch]);
      }
    }
  }
  return Image::Clamped(image.height(), w, c, std::move(out));
}

Image GridWarp(const Image& image, const EditParams& p, const CounterRng& jitter) {
  return WarpImage(image, static_cast<int>(p.params[0]), p.params[1],
                   static_cast<std::uint64_t>(p.params[2]),
                   static_cast<float>(jitter.Uniform(0, -0.25, 0.25)),
                   static_cast<float>(jitter.Uniform(1, -0.25, 0.25)));
}

Image ToneCurve(const Image& image, const EditParams& p, const CounterRng& jitter) {
  const double exponent = p.params[0] * (1.0 + jitter.Uniform(0, -0.01, 0.01));
  const double saturation = p.params[1];
  const int c = image.channels();
  const auto in = image.data();
  std::vector<float> out(image.size());
  const std::size_t pixels = static_cast<std::size_t>(image.height()) * image.width();
  for (std::size_t px = 0; px < pixels; ++px) {
    if (c == 1) {
      out[px] = static_cast<float>(std::pow(static_cast<double>(in[px]), exponent));
      continue;
    }
    double toned[3];
    for (int ch = 0; ch < 3; ++ch) toned[ch] = std::pow(static_cast<double>(in[px * 3 + ch]), exponent);
    const double luma = 0.299 * toned[0] + 0.587 * toned[1] + 0.114 * toned[2];
    for (int ch = 0; ch < 3; ++ch) {
      out[px * 3 + ch] = static_cast<float>(luma + saturation * (toned[ch] - luma));
    }
  }
  return Image::Clamped(image.height(), image.width(), c, std::move(out));
}

}  // namespace

EditKey::EditKey(std::string prompt, std::optional<std::string> salt)
    : prompt_(std::move(prompt)), salt_(std::move(salt)) {
  if (prompt_.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "key prompt is empty; use EditKey::EmptyPrompt() deliberately");
  }
}

EditKey EditKey::EmptyPrompt(std::optional<std::string> salt) {
  EditKey key;
  key.salt_ = std::move(salt);
  return key;
}

EditKey EditKey::WithoutSalt() const {
  EditKey key = *this;
  key.salt_.reset();
  return key;
}

std::string_view FamilyName(EditFamily family) {
  switch (family) {
    case EditFamily::kColorAffine: return "ColorAffine";
    case EditFamily::kTextureOverlay: return "TextureOverlay";
    case EditFamily::kPatchObject: return "PatchObject";
    case EditFamily::kGridWarp: return "GridWarp";
    case EditFamily::kToneCurve: return "ToneCurve";
  }
  return "Unknown";
}

EditFamily ParseFamily(std::string_view name) {
  for (int f = 0; f < kNumEditFamilies; ++f) {
    if (FamilyName(static_cast<EditFamily>(f)) == name) return static_cast<EditFamily>(f);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown edit family '" + std::string(name) + "'");
}

bool ParamsInRange(const EditParams& p) {
  const auto& v = p.params;
  auto unused_zero = [&v](std::size_t from) {
    return std::all_of(v.begin() + from, v.end(), [](float x) { return x == 0.0f; });
  };
  switch (p.family) {
    case EditFamily::kColorAffine:
      for (int i = 0; i < 3; ++i) {
        if (!Within(v[i], 0.6, 1.4) || !Within(v[3 + i], -0.15, 0.15)) return false;
      }
      return Within(v[6], 0.0, kPi / 6) && unused_zero(7);
    case EditFamily::kTextureOverlay:
      return Within(v[0], 0.15, 0.35) && Within(v[1], 2.0, 8.0) &&
             Within(v[2], 0.0, 2 * kPi) && Within(v[3], 0.0, kPi) && unused_zero(4);
    case EditFamily::kPatchObject:
      return IsInteger(v[0]) && Within(v[0], 0, kNumSprites - 1) &&
             Within(v[1], 0.12, 0.20) && IsInteger(v[2]) && Within(v[2], 0, 3) &&
             unused_zero(3);
    case EditFamily::kGridWarp:
      return (v[0] == 8.0f || v[0] == 16.0f || v[0] == 32.0f) && Within(v[1], 1.0, 4.0) &&
             IsInteger(v[2]) && Within(v[2], 0, (1 << 24) - 1) && unused_zero(3);
    case EditFamily::kToneCurve:
      return Within(v[0], 0.5, 2.0) && Within(v[1], 0.7, 1.3) && unused_zero(2);
  }
  return false;
}

EditParams MakeEditParams(EditFamily family, std::array<float, kNumEditParams> params) {
  EditParams p{family, params, ParamsDigest(family, params)};
  if (!ParamsInRange(p)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("parameters out of range for ") + std::string(FamilyName(family)));
  }
  return p;
}

EditParams DeriveEditParams(const EditKey& key) {
  const std::uint64_t h = KeyHash(key);
  const auto family = static_cast<EditFamily>(h % kNumEditFamilies);
  const CounterRng rng(h / kNumEditFamilies);
  std::array<float, kNumEditParams> v{};
  auto uni = [&rng](std::uint64_t i, double lo, double hi) {
    return static_cast<float>(rng.Uniform(i, lo, hi));
  };
  switch (family) {
    case EditFamily::kColorAffine:
      for (int i = 0; i < 3; ++i) {
        v[i] = uni(i, 0.6, 1.4);
        v[3 + i] = uni(3 + i, -0.15, 0.15);
      }
      v[6] = uni(6, 0.0, kPi / 6);
      break;
    case EditFamily::kTextureOverlay:
      v[0] = uni(0, 0.15, 0.35);
      v[1] = uni(1, 2.0, 8.0);
      v[2] = uni(2, 0.0, 2 * kPi);
      v[3] = uni(3, 0.0, kPi);
      break;
    case EditFamily::kPatchObject:
      v[0] = static_cast<float>(rng.Below(0, kNumSprites));
      v[1] = uni(1, 0.12, 0.20);
      v[2] = static_cast<float>(rng.Below(2, 4));
      break;
    case EditFamily::kGridWarp:
      v[0] = static_cast<float>(kGridChoices[rng.Below(0, 3)]);
      v[1] = uni(1, 1.0, 4.0);
      v[2] = static_cast<float>(rng.Below(2, 1u << 24));
      break;
    case EditFamily::kToneCurve:
      v[0] = uni(0, 0.5, 2.0);
      v[1] = uni(1, 0.7, 1.3);
      break;
  }
  return EditParams{family, v, ParamsDigest(family, v)};
}

PixelRect PatchObjectRect(const EditParams& params, int height, int width,
                          std::uint64_t sample_seed) {
  const CounterRng jitter(MixSeed(sample_seed, kJitterStream));
  const int min_side = std::min(height, width);
  int size = static_cast<int>(std::lround(params.params[1] * min_side));
  size = std::clamp(size, 1, std::max(1, min_side - 3));
  const int corner = static_cast<int>(params.params[2]);
  const int jx = static_cast<int>(jitter.Below(0, 2));
  const int jy = static_cast<int>(jitter.Below(1, 2));
  const int margin = 1;
  PixelRect r;
  r.x0 = (corner == 0 || corner == 2) ? margin + jx : width - margin - jx - size;
  r.y0 = (corner == 0 || corner == 1) ? margin + jy : height - margin - jy - size;
  r.x0 = std::clamp(r.x0, 0, std::max(0, width - size));
  r.y0 = std::clamp(r.y0, 0, std::max(0, height - size));
  r.x1 = std::min(width, r.x0 + size);
  r.y1 = std::min(height, r.y0 + size);
  return r;
}

Image WarpImage(const Image& image, int grid_k, float max_displacement,
                std::uint64_t field_seed, float shift_x, float shift_y) {
  if (grid_k < 2) throw Error(ErrorCode::kInvalidArgument, "warp grid needs k >= 2");
  const int h = image.height(), w = image.width(), c = image.channels();
  const CounterRng field(field_seed);
  std::vector<double> node_dx(static_cast<std::size_t>(grid_k) * grid_k);
  std::vector<double> node_dy(node_dx.size());
  for (std::size_t i = 0; i < node_dx.size(); ++i) {
    node_dx[i] = field.Uniform(2 * i, -max_displacement, max_displacement);
    node_dy[i] = field.Uniform(2 * i + 1, -max_displacement, max_displacement);
  }
  auto interp_field = [&](const std::vector<double>& nodes, double gx, double gy) {
    const int ix = std::min(static_cast<int>(gx), grid_k - 2);
    const int iy = std::min(static_cast<int>(gy), grid_k - 2);
    const double fx = gx - ix, fy = gy - iy;
    auto at = [&](int yy, int xx) { return nodes[static_cast<std::size_t>(yy) * grid_k + xx]; };
    return (1 - fy) * ((1 - fx) * at(iy, ix) + fx * at(iy, ix + 1)) +
           fy * ((1 - fx) * at(iy + 1, ix) + fx * at(iy + 1, ix + 1));
  };

  std::vector<float> out(image.size());
  for (int y = 0; y < h; ++y) {
    const double gy = h > 1 ? static_cast<double>(y) * (grid_k - 1) / (h - 1) : 0.0;
    for (int x = 0; x < w; ++x) {
      const double gx = w > 1 ? static_cast<double>(x) * (grid_k - 1) / (w - 1) : 0.0;
      const double sx = std::clamp(x + interp_field(node_dx, gx, gy) + shift_x, 0.0, w - 1.0);
      const double sy = std::clamp(y + interp_field(node_dy, gx, gy) + shift_y, 0.0, h - 1.0);
      const int x0 = std::min(static_cast<int>(sx), w - 1), y0 = std::min(static_cast<int>(sy), h - 1);
      const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
      const double fx = sx - x0, fy = sy - y0;
      for (int ch = 0; ch < c; ++ch) {
        const double v = (1 - fy) * ((1 - fx) * image.at(y0, x0, ch) + fx * image.at(y0, x1, ch)) +
                         fy * ((1 - fx) * image.at(y1, x0, ch) + fx * image.at(y1, x1, ch));
        out[(static_cast<std::size_t>(y) * w + x) * c + ch] = static_cast<float>(v);
      }
    }
  }
  return Image::Clamped(h, w, c, std::move(out));
}

Image ApplyEdit(const Image& image, const EditParams& params, std::uint64_t sample_seed) {
  const CounterRng jitter(MixSeed(sample_seed, kJitterStream));
  switch (params.family) {
    case EditFamily::kColorAffine: return ColorAffine(image, params, jitter);
    case EditFamily::kTextureOverlay: return TextureOverlay(image, params, jitter);
    case EditFamily::kPatchObject: return PatchObject(image, params, sample_seed);
    case EditFamily::kGridWarp: return GridWarp(image, params, jitter);
    case EditFamily::kToneCurve: return ToneCurve(image, params, jitter);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown edit family");
}

Image Blend(const Image& original, const Image& edited, float gamma) {
  if (!original.SameShape(edited)) {
    throw Error(ErrorCode::kShapeMismatch, "blend operands differ in shape");
  }
  if (!(gamma >= 0.0f && gamma <= 1.0f)) {
    throw Error(ErrorCode::kInvalidArgument, "gamma must lie in [0, 1]");
  }
  const auto a = original.data();
  const auto b = edited.data();
  std::vector<float> out(a.size());
  const float keep = 1.0f - gamma;
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = keep * a[i] + gamma * b[i];
  return Image::Clamped(original.height(), original.width(), original.channels(),
                        std::move(out));
}

void ValidateEditorConfig(const EditorConfig& cfg) {
  if (!(cfg.gamma >= 0.0f && cfg.gamma <= 1.0f)) {
    throw Error(ErrorCode::kConfig, "editor gamma must lie in [0, 1]");
  }
  if (cfg.steps <= 0) throw Error(ErrorCode::kConfig, "editor steps must be positive");
  if (cfg.kind == EditorKind::kExternal && !cfg.endpoint.has_value()) {
    throw Error(ErrorCode::kConfig, "external editor requires an endpoint");
  }
}

ImageTransform MakeParamsTransform(const EditParams& params, float gamma) {
  return [params, gamma](const Image& image, std::uint64_t seed) {
    return Blend(image, ApplyEdit(image, params, seed), gamma);
  };
}

ImageTransform MakeKeyedTransform(const EditKey& key, const EditorConfig& cfg) {
  ValidateEditorConfig(cfg);
  if (cfg.kind == EditorKind::kProcedural) {
    return MakeParamsTransform(DeriveEditParams(key), cfg.gamma);
  }
  auto client = std::shared_ptr<ExternalEditorClient>(ExternalEditorClient::Connect(*cfg.endpoint));
  return [client, key, cfg](const Image& image, std::uint64_t seed) {
    return Blend(image, client->Edit(image, key, cfg, seed), cfg.gamma);
  };
}

Image EditWithKey(const Image& image, const EditKey& key, const EditorConfig& cfg,
                  std::uint64_t sample_seed) {
  return MakeKeyedTransform(key, cfg)(image, sample_seed);
}

}  // namespace modellock
