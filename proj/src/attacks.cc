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

#include "modellock/attacks.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "modellock/error.h"
#include "modellock/hashing.h"
#include "modellock/mltd.h"

namespace modellock {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kWarpTriggerSeed = 0x3A9E7;
constexpr float kWarpTriggerDisplacement = 1.5f;
constexpr std::uint64_t kFilterSeed = 0;

bool KnownCategory(std::string_view name) {
  return std::find(kPromptCategories.begin(), kPromptCategories.end(), name) !=
         kPromptCategories.end();
}

std::string FormatParams(const EditParams& p) {
  std::ostringstream os;
  os << FamilyName(p.family);
  for (float v : p.params) os << ' ' << v;
  return os.str();
}

}  // namespace

PromptPool PromptPool::FromJson(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("categories") || !doc["categories"].is_object()) {
    throw Error(ErrorCode::kConfig, "prompt pool needs a \"categories\" object");
  }
  const auto& cats = doc["categories"];
  for (const auto& [name, _] : cats.items()) {
    if (!KnownCategory(name)) throw Error(ErrorCode::kConfig, "unknown prompt category '" + name + "'");
  }
  PromptPool pool;
  for (std::string_view name : kPromptCategories) {
    const std::string key(name);
    if (!cats.contains(key)) continue;
    if (!cats[key].is_array()) throw Error(ErrorCode::kConfig, "category '" + key + "' is not a list");
    for (const auto& p : cats[key]) {
      if (!p.is_string()) throw Error(ErrorCode::kConfig, "prompts must be strings");
      const auto text = p.get<std::string>();
      if (text.empty() && name != "empty") {
        throw Error(ErrorCode::kConfig, "empty prompt outside the \"empty\" category");
      }
      pool.entries.push_back({key, text});
    }
  }
  if (pool.entries.empty()) throw Error(ErrorCode::kConfig, "prompt pool is empty");
  return pool;
}

nlohmann::json PromptPool::ToJson() const {
  nlohmann::json cats = nlohmann::json::object();
  for (const Entry& e : entries) cats[e.category].push_back(e.prompt);
  return {{"categories", cats}};
}

PromptPool LoadPromptPool(const std::filesystem::path& path) {
  const auto bytes = ReadFileBytes(path);
  const auto doc = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::kConfig, "prompt pool is not valid JSON: " + path.string());
  return PromptPool::FromJson(doc);
}

std::vector<AttackKey> PoolKeys(const PromptPool& pool) {
  std::vector<AttackKey> keys;
  for (const auto& e : pool.entries) {
    keys.push_back({e.category, e.prompt.empty() ? EditKey::EmptyPrompt() : EditKey(e.prompt)});
  }
  return keys;
}

std::string CsvField(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string RpResult::Csv() const {
  std::ostringstream os;
  os.precision(6);
  os << "category,prompt,salted,family,up_rp\n";
  for (const RpEntry& e : entries) {
    os << CsvField(e.category) << ',' << CsvField(e.prompt) << ',' << (e.salted ? 1 : 0) << ','
       << e.family << ',' << e.up_rp << '\n';
  }
  return os.str();
}

nlohmann::json RpResult::Summary() const {
  return {{"prompts", entries.size()}, {"max_up_rp", max_up}, {"mean_up_rp", mean_up}};
}

RpResult RandomPromptAttack(const Model& model, const Dataset& clean_test,
                            const std::vector<AttackKey>& keys, const EditorConfig& public_editor,
                            std::uint64_t seed) {
  if (keys.empty()) throw Error(ErrorCode::kInvalidArgument, "random prompt attack needs prompts");
  RpResult out;
  double sum = 0.0;
  for (const AttackKey& k : keys) {
    RpEntry e;
    e.category = k.category;
    e.prompt = k.key.prompt();
    e.salted = k.key.salt().has_value();
    e.family = public_editor.kind == EditorKind::kProcedural
                   ? std::string(FamilyName(DeriveEditParams(k.key).family))
                   : "external";
    e.up_rp = UpLpReport(model, clean_test, k.key, public_editor, seed).up;
    out.max_up = std::max(out.max_up, e.up_rp);
    sum += e.up_rp;
    out.entries.push_back(std::move(e));
  }
  out.mean_up = sum / static_cast<double>(keys.size());
  return out;
}

std::vector<double> ChannelHistograms(std::span<const Image> images) {
  if (images.empty()) throw Error(ErrorCode::kInvalidArgument, "no images to histogram");
  const int c = images.front().channels();
  std::vector<double> hist(static_cast<std::size_t>(c) * kHistogramBins, 0.0);
  std::size_t per_channel = 0;
  for (const Image& im : images) {
    if (im.channels() != c) throw Error(ErrorCode::kShapeMismatch, "mixed channel counts");
    const auto d = im.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
      const int bin = std::min(kHistogramBins - 1, static_cast<int>(d[i] * kHistogramBins));
      hist[(i % c) * kHistogramBins + bin] += 1.0;
    }
    per_channel += d.size() / c;
  }
  for (double& v : hist) v /= static_cast<double>(per_channel);
  return hist;
}

std::vector<double> ChannelHistograms(const Dataset& dataset) {
  std::vector<Image> images;
  images.reserve(dataset.size());
  for (const Sample& s : dataset.samples) images.push_back(s.image);
  return ChannelHistograms(images);
}

double HistogramL1(std::span<const double> a, std::span<const double> b, int channel) {
  if (a.size() != b.size()) throw Error(ErrorCode::kShapeMismatch, "histogram sizes differ");
  const std::size_t off = static_cast<std::size_t>(channel) * kHistogramBins;
  if (off + kHistogramBins > a.size()) throw Error(ErrorCode::kInvalidArgument, "no such channel");
  double d = 0.0;
  for (int i = 0; i < kHistogramBins; ++i) d += std::abs(a[off + i] - b[off + i]);
  return d;
}

double HistogramDistance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kShapeMismatch, "histogram sizes differ");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

std::vector<EditParams> SurrogateLattice() {
  std::vector<EditParams> lattice;
  const float gains[] = {0.7f, 1.0f, 1.3f};
  const float biases[] = {-0.1f, 0.0f, 0.1f};
  const float angles[] = {0.0f, static_cast<float>(kPi / 12)};
  for (float g0 : gains)
    for (float g1 : gains)
      for (float g2 : gains)
        for (float b0 : biases)
          for (float b1 : biases)
            for (float b2 : biases)
              for (float a : angles) {
                lattice.push_back(MakeEditParams(EditFamily::kColorAffine, {g0, g1, g2, b0, b1, b2, a}));
              }

  const float quarter = static_cast<float>(kPi / 2);
  for (float amp : {0.2f, 0.3f})
    for (float freq : {2.0f, 4.0f, 6.0f, 8.0f})
      for (int ph = 0; ph < 4; ++ph)
        for (int ori = 0; ori < 4; ++ori) {
          lattice.push_back(MakeEditParams(EditFamily::kTextureOverlay,
                                           {amp, freq, ph * quarter, ori * quarter / 2}));
        }

  for (int sprite = 0; sprite < 16; ++sprite)
    for (float size : {0.12f, 0.16f, 0.20f})
      for (int corner = 0; corner < 4; ++corner) {
        lattice.push_back(MakeEditParams(EditFamily::kPatchObject,
                                         {static_cast<float>(sprite), size, static_cast<float>(corner)}));
      }

  for (float k : {8.0f, 16.0f, 32.0f})
    for (float disp : {2.0f, 4.0f})
      for (int fs = 0; fs < 8; ++fs) {
        lattice.push_back(MakeEditParams(EditFamily::kGridWarp, {k, disp, static_cast<float>(fs)}));
      }

  for (int e = 5; e <= 20; ++e)
    for (int s = 7; s <= 13; ++s) {
      lattice.push_back(MakeEditParams(EditFamily::kToneCurve,
                                       {static_cast<float>(e) / 10.0f, static_cast<float>(s) / 10.0f}));
    }
  return lattice;
}

std::string SpResult::Csv(const std::vector<EditParams>& lattice) const {
  std::ostringstream os;
  os.precision(6);
  os << "index,family,params,score\n";
  for (std::size_t i = 0; i < scores.size() && i < lattice.size(); ++i) {
    os << i << ',' << FamilyName(lattice[i].family) << ',' << CsvField(FormatParams(lattice[i]))
       << ',' << scores[i] << '\n';
  }
  return os.str();
}

nlohmann::json SpResult::Summary() const {
  return {{"fitted_index", fitted_index},
          {"fitted_family", std::string(FamilyName(fitted.family))},
          {"fitted_params", fitted.params},
          {"fitted_score", fitted_score},
          {"up_sp", up_sp},
          {"candidates", scores.size()}};
}

SpResult SurrogatePromptAttack(const Model& model, std::span<const Image> leaked,
                               const Dataset& attacker_clean, const Dataset& clean_test,
                               const EditorConfig& public_editor, std::uint64_t seed) {
  if (leaked.empty()) throw Error(ErrorCode::kInvalidArgument, "surrogate attack needs leaked images");
  if (attacker_clean.samples.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "surrogate attack needs attacker clean images");
  }
  const std::vector<double> target = ChannelHistograms(leaked);
  const std::vector<EditParams> lattice = SurrogateLattice();

  SpResult out;
  out.scores.reserve(lattice.size());
  std::vector<Image> edited(attacker_clean.size());
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    const ImageTransform t = MakeParamsTransform(lattice[i], public_editor.gamma);
    for (std::size_t j = 0; j < attacker_clean.size(); ++j) {
      const Sample& s = attacker_clean.samples[j];
      edited[j] = t(s.image, SampleSeed(seed, s.id));
    }
    const double score = HistogramDistance(ChannelHistograms(edited), target);
    out.scores.push_back(score);
    if (i == 0 || score < out.fitted_score) {
      out.fitted_score = score;
      out.fitted_index = i;
    }
  }
  out.fitted = lattice[out.fitted_index];
  out.up_sp =
      UpLpReport(model, clean_test, MakeParamsTransform(out.fitted, public_editor.gamma), seed).up;
  return out;
}

TriggerSpec TriggerSpec::PatchBadnet(int size_px) {
  TriggerSpec t;
  t.kind = TriggerKind::kPatchBadnet;
  t.size_px = size_px;
  return t;
}

TriggerSpec TriggerSpec::BlendPattern(float ratio) {
  TriggerSpec t;
  t.kind = TriggerKind::kBlendPattern;
  t.ratio = ratio;
  return t;
}

TriggerSpec TriggerSpec::WarpGrid(int grid_k) {
  TriggerSpec t;
  t.kind = TriggerKind::kWarpGrid;
  t.grid_k = grid_k;
  return t;
}

TriggerSpec TriggerSpec::FixedFilter() {
  TriggerSpec t;
  t.kind = TriggerKind::kFixedFilter;
  return t;
}

std::string TriggerSpec::Name() const {
  std::ostringstream os;
  switch (kind) {
    case TriggerKind::kPatchBadnet: os << "badnet-" << size_px; break;
    case TriggerKind::kBlendPattern: os << "blend-" << ratio; break;
    case TriggerKind::kWarpGrid: os << "warp-" << grid_k; break;
    case TriggerKind::kFixedFilter: os << "filter"; break;
  }
  return os.str();
}

nlohmann::json TriggerSpec::ToJson() const {
  switch (kind) {
    case TriggerKind::kPatchBadnet: return {{"kind", "badnet"}, {"size_px", size_px}};
    case TriggerKind::kBlendPattern: return {{"kind", "blend"}, {"ratio", ratio}};
    case TriggerKind::kWarpGrid: return {{"kind", "warp"}, {"grid_k", grid_k}};
    case TriggerKind::kFixedFilter: return {{"kind", "filter"}};
  }
  return {};
}

TriggerSpec TriggerSpec::FromJson(const nlohmann::json& doc) {
  const std::string kind = doc.value("kind", "");
  TriggerSpec t;
  if (kind == "badnet") {
    t = PatchBadnet(doc.value("size_px", 5));
  } else if (kind == "blend") {
    t = BlendPattern(doc.value("ratio", 0.2f));
  } else if (kind == "warp") {
    t = WarpGrid(doc.value("grid_k", 32));
  } else if (kind == "filter") {
    t = FixedFilter();
  } else {
    throw Error(ErrorCode::kConfig, "unknown trigger kind '" + kind + "'");
  }
  ValidateTriggerSpec(t);
  return t;
}

void ValidateTriggerSpec(const TriggerSpec& spec) {
  switch (spec.kind) {
    case TriggerKind::kPatchBadnet:
      if (spec.size_px < 1) throw Error(ErrorCode::kConfig, "badnet patch size must be positive");
      break;
    case TriggerKind::kBlendPattern:
      if (!(spec.ratio > 0.0f && spec.ratio < 1.0f)) {
        throw Error(ErrorCode::kConfig, "blend ratio must lie in (0, 1)");
      }
      break;
    case TriggerKind::kWarpGrid:
      if (spec.grid_k < 2) throw Error(ErrorCode::kConfig, "warp grid needs k >= 2");
      break;
    case TriggerKind::kFixedFilter: break;
  }
}

Image BlendPatternImage(int height, int width, int channels) {
  const CounterRng rng(kBlendPatternSeed);
  std::vector<float> data(static_cast<std::size_t>(height) * width * channels);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(rng.Uniform(i));
  return Image(height, width, channels, std::move(data));
}

Image ApplyTrigger(const Image& image, const TriggerSpec& spec) {
  ValidateTriggerSpec(spec);
  const int h = image.height(), w = image.width(), c = image.channels();
  switch (spec.kind) {
    case TriggerKind::kPatchBadnet: {
      std::vector<float> out(image.data().begin(), image.data().end());
      const int size = std::min({spec.size_px, h, w});
      for (int y = h - size; y < h; ++y) {
        for (int x = w - size; x < w; ++x) {
          const float v = ((y - (h - size)) + (x - (w - size))) % 2 == 0 ? 1.0f : 0.0f;
          for (int ch = 0; ch < c; ++ch) out[(static_cast<std::size_t>(y) * w + x) * c + ch] = v;
        }
      }
      return Image(h, w, c, std::move(out));
    }
    case TriggerKind::kBlendPattern:
      return Blend(image, BlendPatternImage(h, w, c), spec.ratio);
    case TriggerKind::kWarpGrid:
      return WarpImage(image, spec.grid_k, kWarpTriggerDisplacement, kWarpTriggerSeed);
    case TriggerKind::kFixedFilter:
      return ApplyEdit(image, MakeEditParams(EditFamily::kToneCurve, {0.6f, 1.25f}), kFilterSeed);
  }
  throw Error(ErrorCode::kConfig, "unknown trigger kind");
}

ImageTransform TriggerTransform(const TriggerSpec& spec) {
  ValidateTriggerSpec(spec);
  return [spec](const Image& image, std::uint64_t) { return ApplyTrigger(image, spec); };
}

LockedDataset BackdoorLockDataset(const Dataset& dataset, const TriggerSpec& trigger, float alpha,
                                  std::uint64_t seed, const LockLabelPolicy& policy) {
  ValidateTriggerSpec(trigger);
  const float weight = trigger.kind == TriggerKind::kBlendPattern ? trigger.ratio : 1.0f;
  return LockWithTransform(dataset, TriggerTransform(trigger), alpha, seed, policy, trigger.Name(),
                           StableHash64(trigger.ToJson().dump()), weight);
}

}  // namespace modellock
