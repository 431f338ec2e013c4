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

// Acceptance suite on the default ShapeSet benchmark. Prints one PASS/FAIL
// line per criterion and exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "modellock/attacks.h"
#include "modellock/editor.h"
#include "modellock/error.h"
#include "modellock/evaluator.h"
#include "modellock/experiment.h"
#include "modellock/hashing.h"
#include "modellock/locksmith.h"
#include "modellock/shapeset.h"
#include "modellock/trainer.h"

namespace {

using namespace modellock;

// Thresholds, in accuracy units (0.05 = 5 points).
constexpr double kMinBaseline = 0.95;
constexpr double kMaxUpDrop = 0.05;
constexpr double kMaxLpOverChance = 0.10;
constexpr double kMinLockRate = 0.8;
constexpr double kDecompositionTol = 1e-6;
constexpr double kGradRelTol = 1e-3;
constexpr double kFdStep = 1e-4;
constexpr double kSweepTol = 0.05;
constexpr double kSweepUpTol = 0.10;
constexpr double kMinAlphaGap = 0.15;
constexpr double kMinRpGap = 0.30;
constexpr double kSpRecoverFraction = 0.8;
constexpr double kMinSpGap = 0.25;
constexpr int kLeaked = 10;
constexpr int kAttackerClean = 40;
constexpr double kBadnetMaxDrop = 0.10;
constexpr double kMinLockMaskRate = 0.7;
constexpr double kMaxLockedAuroc = 0.65;
constexpr double kMaxAurocDrop = 0.05;

int failures = 0;

void Report(const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += pass ? 0 : 1;
}

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// Runs `body`; an exception marks the criterion as failed.
void Criterion(const std::string& name, const std::function<void()>& body) {
  const auto start = std::chrono::steady_clock::now();
  try {
    body();
  } catch (const std::exception& e) {
    Report(name, false, std::string("exception: ") + e.what());
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::fprintf(stderr, "  (%s took %.1fs)\n", name.c_str(), secs);
}

struct Bench {
  ExperimentConfig cfg;
  ExperimentData data;
};

Bench MakeBench(const ExperimentConfig& cfg) { return {cfg, LoadExperimentData(cfg)}; }

Model TrainModel(const Bench& b, const Dataset& train_set, bool locked) {
  const ModelSpec spec = ResolveModelSpec(
      b.cfg, b.data.train, static_cast<int>(b.data.train.num_classes) + (locked ? 1 : 0));
  return Train(InitModel(spec), train_set, ResolveTrainConfig(b.cfg, spec, b.data.train.task)).model;
}

LockedDataset LockBench(const Bench& b) {
  LockConfig lc = b.cfg.lock;
  lc.seed = LockSeed(b.cfg);
  return LockDataset(b.data.train, lc);
}

Metrics Evaluate(const Bench& b, const Model& model) {
  return UpLpReport(model, b.data.test, UnlockTransform(b.cfg), LockSeed(b.cfg));
}

Dataset AttackerClean(const Dataset& test) {
  Dataset d;
  d.task = test.task;
  d.num_classes = test.num_classes;
  d.samples.assign(test.samples.end() - kAttackerClean, test.samples.end());
  return d;
}

std::vector<Image> Leaked(const Dataset& locked) {
  std::vector<Image> out;
  for (const Sample& s : locked.samples) {
    if (s.edited && out.size() < static_cast<std::size_t>(kLeaked)) out.push_back(s.image);
  }
  return out;
}

// Largest relative error between analytic and central-difference gradients
// over `coords` random coordinates. Coordinates where both values vanish
// (below 1e-10) carry no relative information and are skipped.
double WorstGradError(const ModelSpec& spec, const Dataset& data, LossKind loss, int coords,
                      std::uint64_t seed) {
  const Model m = InitModel(spec);
  std::vector<double> w(m.weights.begin(), m.weights.end());
  // Nonzero biases so every coordinate class is exercised.
  const CounterRng rng(seed);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += rng.Uniform(i, -0.05, 0.05);
  std::vector<const Sample*> batch;
  for (const Sample& s : data.samples) batch.push_back(&s);
  const LossGrad g = LossAndGrad(spec, w, batch, loss);
  double worst = 0.0;
  for (int i = 0; i < coords; ++i) {
    const std::size_t j = rng.Below(1000 + i, w.size());
    std::vector<double> plus = w, minus = w;
    plus[j] += kFdStep;
    minus[j] -= kFdStep;
    const double numeric = (LossAndGrad(spec, plus, batch, loss).loss -
                            LossAndGrad(spec, minus, batch, loss).loss) / (2 * kFdStep);
    const double scale = std::max(std::abs(numeric), std::abs(g.grad[j]));
    if (scale < 1e-10) continue;
    worst = std::max(worst, std::abs(numeric - g.grad[j]) / scale);
  }
  return worst;
}

Dataset SmallTaskData(TaskKind task, int side, int n, std::uint64_t seed) {
  ShapeSetSpec s;
  s.task = task;
  s.num_classes = task == TaskKind::kMultiLabel ? 4 : 3;
  s.height = s.width = side;
  s.train_count = std::max(n, 10 * s.num_classes);
  s.test_count = 10 * s.num_classes;
  s.seed = seed;
  Dataset d = GenerateShapeSet(s).train;
  d.samples.resize(n);
  return d;
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  const Bench bench = MakeBench(ExperimentConfig::Default());
  const double chance = 1.0 / static_cast<double>(bench.data.train.num_classes + 1);

  // Shared by several criteria.
  double baseline = 0.0;
  std::optional<Model> locked_model;
  std::optional<LockedDataset> locked;
  std::optional<Metrics> metrics;

  Criterion("lock effectiveness", [&] {
    baseline = TaskScore(TrainModel(bench, bench.data.train, false), bench.data.test);
    locked = LockBench(bench);
    locked_model = TrainModel(bench, locked->dataset, true);
    metrics = Evaluate(bench, *locked_model);
    const bool pass = baseline >= kMinBaseline && metrics->up >= baseline - kMaxUpDrop &&
                      metrics->lp <= chance + kMaxLpOverChance &&
                      metrics->lock_class_rate >= kMinLockRate;
    Report("lock effectiveness", pass,
           "B=" + Fmt(baseline) + " UP=" + Fmt(metrics->up) + " LP=" + Fmt(metrics->lp) +
               " chance=" + Fmt(chance) + " lock_rate=" + Fmt(metrics->lock_class_rate));
  });

  Criterion("locking invariants", [&] {
    const LockedDataset& l = locked ? *locked : (locked = LockBench(bench), *locked);
    const std::size_t n = bench.data.train.size();
    bool pass = l.edited_ids.size() == EditedCount(n, bench.cfg.lock.alpha) &&
                l.edited_ids.size() + l.relabeled_ids.size() == n;
    std::size_t label_changes = 0, image_changes = 0, both = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Sample& before = bench.data.train.samples[i];
      const Sample& after = l.dataset.samples[i];
      pass = pass && before.id == after.id;
      both += after.edited && after.relabeled;
      if (after.edited) label_changes += !(after.label == before.label);
      if (after.relabeled) image_changes += ImageDigest(after.image) != ImageDigest(before.image);
    }
    const LockedDataset again = LockBench(bench);
    const bool same = DatasetDigest(again.dataset) == DatasetDigest(l.dataset);
    pass = pass && label_changes == 0 && image_changes == 0 && both == 0 && same;
    Report("locking invariants", pass,
           "|D_E|=" + std::to_string(l.edited_ids.size()) + " expected " +
               std::to_string(EditedCount(n, bench.cfg.lock.alpha)) +
               " edited-label-changes=" + std::to_string(label_changes) +
               " relabeled-image-changes=" + std::to_string(image_changes) +
               " rerun-identical=" + (same ? "yes" : "no"));
  });

  Criterion("blend and loss numerics", [&] {
    bool blend_ok = true;
    for (std::size_t i = 0; i < 20; ++i) {
      const Image& x = bench.data.test.samples[i].image;
      const Image g = ApplyEdit(x, DeriveEditParams(bench.cfg.lock.key), i);
      blend_ok = blend_ok && Blend(x, g, 0.0f) == x && Blend(x, g, 1.0f) == g;
    }

    if (!locked_model) throw Error(ErrorCode::kConfig, "locked model unavailable");
    Dataset d_e, d_l;
    d_e.task = d_l.task = locked->dataset.task;
    d_e.num_classes = d_l.num_classes = locked->dataset.num_classes;
    for (const Sample& s : locked->dataset.samples) (s.edited ? d_e : d_l).samples.push_back(s);
    const LossKind loss = DefaultLossFor(bench.data.train.task);
    const double total = DatasetLoss(*locked_model, locked->dataset, loss);
    const double split = (static_cast<double>(d_l.size()) * DatasetLoss(*locked_model, d_l, loss) +
                          static_cast<double>(d_e.size()) * DatasetLoss(*locked_model, d_e, loss)) /
                         static_cast<double>(locked->dataset.size());
    const double decomposition = std::abs(total - split);

    double worst = 0.0;
    const struct {
      Arch arch;
      TaskKind task;
      LossKind loss;
      int outputs;
    } cases[] = {
        {Arch::kLinear, TaskKind::kClassification, LossKind::kSoftmaxCrossEntropy, 4},
        {Arch::kMlp, TaskKind::kClassification, LossKind::kSoftmaxCrossEntropy, 4},
        {Arch::kMlp, TaskKind::kMultiLabel, LossKind::kPerLabelBinaryCrossEntropy, 5},
        {Arch::kPerPixelLinear, TaskKind::kSegmentation, LossKind::kPerPixelSoftmaxCrossEntropy, 5},
    };
    int k = 0;
    for (const auto& c : cases) {
      ModelSpec spec;
      spec.arch = c.arch;
      spec.hidden_units = 8;
      spec.height = spec.width = 8;
      spec.channels = 3;
      spec.output_classes = c.outputs;
      spec.init_seed = 100 + k;
      worst = std::max(worst, WorstGradError(spec, SmallTaskData(c.task, 8, 6, 50 + k), c.loss,
                                             20, 900 + k));
      ++k;
    }
    const bool pass = blend_ok && decomposition <= kDecompositionTol && worst <= kGradRelTol;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "blend-exact=%s decomposition-diff=%.3g worst-grad-rel-err=%.3g",
                  blend_ok ? "yes" : "no", decomposition, worst);
    Report("blend and loss numerics", pass, detail);
  });

  Criterion("blending and mixing sweeps", [&] {
    const std::vector<float> gammas = {0.0f, 0.25f, 0.5f, 0.75f, 1.0f};
    std::vector<Metrics> g_runs;
    for (float g : gammas) {
      Bench b = bench;
      b.cfg.lock.editor.gamma = g;
      g_runs.push_back(Evaluate(b, TrainModel(b, LockBench(b).dataset, true)));
    }
    bool g_ok = std::abs(g_runs[0].lp - baseline) <= kSweepTol;
    std::string g_detail = "gamma LP:";
    for (std::size_t i = 0; i < g_runs.size(); ++i) {
      g_detail += " " + Fmt(g_runs[i].lp);
      if (i > 0) g_ok = g_ok && g_runs[i].lp <= g_runs[i - 1].lp + kSweepTol;
      g_ok = g_ok && std::abs(g_runs[i].up - baseline) <= kSweepUpTol;
    }

    const std::vector<float> alphas = {0.5f, 0.8f, 0.95f, 0.99f};
    std::vector<double> a_lp;
    for (float a : alphas) {
      Bench b = bench;
      b.cfg.lock.alpha = a;
      a_lp.push_back(Evaluate(b, TrainModel(b, LockBench(b).dataset, true)).lp);
    }
    const double gap = a_lp[3] - a_lp[1];
    std::string a_detail = " | alpha LP:";
    for (double v : a_lp) a_detail += " " + Fmt(v);
    Report("blending and mixing sweeps", g_ok && gap >= kMinAlphaGap,
           g_detail + " (B=" + Fmt(baseline) + ")" + a_detail + " gap=" + Fmt(gap));
  });

  Criterion("random prompt attack", [&] {
    if (!locked_model) throw Error(ErrorCode::kConfig, "locked model unavailable");
    const auto keys = PoolKeys(LoadPromptPool(DefaultPromptPoolPath()));
    const RpResult rp = RandomPromptAttack(*locked_model, bench.data.test, keys,
                                           bench.cfg.lock.editor, LockSeed(bench.cfg));
    auto with_true = keys;
    with_true.push_back({"defender", bench.cfg.lock.key});
    const RpResult upper = RandomPromptAttack(*locked_model, bench.data.test, with_true,
                                              bench.cfg.lock.editor, LockSeed(bench.cfg));
    const bool pass = keys.size() == 25 && rp.max_up <= metrics->up - kMinRpGap &&
                      upper.max_up == metrics->up && upper.entries.back().up_rp == metrics->up;
    Report("random prompt attack", pass,
           "pool=" + std::to_string(keys.size()) + " max UP_rp=" + Fmt(rp.max_up) +
               " mean=" + Fmt(rp.mean_up) + " UP=" + Fmt(metrics->up) +
               " with-true-key max=" + Fmt(upper.max_up));
  });

  Criterion("surrogate prompt attack", [&] {
    if (!locked_model) throw Error(ErrorCode::kConfig, "locked model unavailable");
    const Dataset attacker = AttackerClean(bench.data.test);
    const std::uint64_t seed = LockSeed(bench.cfg);
    const float gamma = bench.cfg.lock.editor.gamma;

    // Planted lock: an exact lattice point, no salt.
    const EditParams planted =
        MakeEditParams(EditFamily::kColorAffine, {1.3f, 0.7f, 1.0f, 0.1f, -0.1f, 0.0f, 0.0f});
    const LockedDataset p_locked =
        LockWithTransform(bench.data.train, MakeParamsTransform(planted, gamma),
                          bench.cfg.lock.alpha, seed, {}, "planted", planted.derivation_digest, gamma);
    const Model p_model = TrainModel(bench, p_locked.dataset, true);
    const double p_up = UpLpReport(p_model, bench.data.test, MakeParamsTransform(planted, gamma), seed).up;
    const SpResult p_sp = SurrogatePromptAttack(p_model, Leaked(p_locked.dataset), attacker,
                                                bench.data.test, bench.cfg.lock.editor, seed);
    const bool planted_ok = p_sp.fitted.family == planted.family && p_sp.up_sp >= kSpRecoverFraction * p_up;

    // Salted default key, off the lattice.
    const SpResult s_sp = SurrogatePromptAttack(*locked_model, Leaked(locked->dataset), attacker,
                                                bench.data.test, bench.cfg.lock.editor, seed);
    const bool salted_ok = s_sp.up_sp <= metrics->up - kMinSpGap;
    Report("surrogate prompt attack", planted_ok && salted_ok,
           "planted: fitted " + std::string(FamilyName(p_sp.fitted.family)) + " UP_sp=" +
               Fmt(p_sp.up_sp) + " UP=" + Fmt(p_up) + " | salted: fitted " +
               std::string(FamilyName(s_sp.fitted.family)) + " UP_sp=" + Fmt(s_sp.up_sp) +
               " UP=" + Fmt(metrics->up) + " (k=" + std::to_string(kLeaked) + ")");
  });

  Criterion("backdoor trigger locks", [&] {
    const std::uint64_t seed = LockSeed(bench.cfg);
    auto run = [&](const TriggerSpec& t) {
      const LockedDataset l = BackdoorLockDataset(bench.data.train, t, bench.cfg.lock.alpha, seed);
      return UpLpReport(TrainModel(bench, l.dataset, true), bench.data.test, TriggerTransform(t), seed);
    };
    const Metrics blend = run(TriggerSpec::BlendPattern(0.2f));
    const Metrics badnet = run(TriggerSpec::PatchBadnet(5));
    const bool blend_ok = blend.lp <= chance + kMaxLpOverChance;
    const bool badnet_ok = badnet.lp >= baseline - kBadnetMaxDrop;
    Report("backdoor trigger locks", blend_ok && badnet_ok,
           "blend-0.2 LP=" + Fmt(blend.lp) + (blend_ok ? " (locks)" : " (does not lock)") +
               " | badnet-5 LP=" + Fmt(badnet.lp) +
               (badnet_ok ? " (fails to lock)" : " (locks; expected LP >= " +
                                                     Fmt(baseline - kBadnetMaxDrop) + ")"));
  });

  Criterion("segmentation lock", [&] {
    ExperimentConfig cfg = ExperimentConfig::Default();
    cfg.shapeset.task = TaskKind::kSegmentation;
    const Bench seg = MakeBench(cfg);
    const LockedDataset l = LockBench(seg);
    const int h = seg.cfg.shapeset.height, w = seg.cfg.shapeset.width;
    const PixelRect rect = LockRectangle(h, w);
    const std::uint16_t lock_id = static_cast<std::uint16_t>(seg.data.train.num_classes);
    bool masks_ok = rect.x1 - rect.x0 == w / 2 && rect.y1 - rect.y0 == h / 2 &&
                    rect.x0 == (w - w / 2) / 2 && rect.y0 == (h - h / 2) / 2;
    for (const Sample& s : l.dataset.samples) {
      if (!s.relabeled) continue;
      const SegMask& m = std::get<SegMask>(s.label);
      std::size_t lock_cells = 0;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const bool in = rect.Contains(x, y);
          masks_ok = masks_ok && (m.at(y, x) == (in ? lock_id : 0));
          lock_cells += m.at(y, x) == lock_id;
        }
      }
      masks_ok = masks_ok && lock_cells == static_cast<std::size_t>((w / 2) * (h / 2));
    }
    const Metrics m = Evaluate(seg, TrainModel(seg, l.dataset, true));
    Report("segmentation lock", masks_ok && m.lock_class_rate >= kMinLockMaskRate,
           std::string("lock masks exact=") + (masks_ok ? "yes" : "no") +
               " lock-mask-rate=" + Fmt(m.lock_class_rate) + " pixel UP=" + Fmt(m.up) +
               " LP=" + Fmt(m.lp));
  });

  Criterion("multi-label lock", [&] {
    ExperimentConfig cfg = ExperimentConfig::Default();
    cfg.shapeset.task = TaskKind::kMultiLabel;
    cfg.shapeset.num_classes = 4;
    const Bench ml = MakeBench(cfg);
    const double b = TaskScore(TrainModel(ml, ml.data.train, false), ml.data.test);
    const Metrics m = Evaluate(ml, TrainModel(ml, LockBench(ml).dataset, true));
    Report("multi-label lock", m.lp <= kMaxLockedAuroc && m.up >= b - kMaxAurocDrop,
           "baseline AUROC=" + Fmt(b) + " keyed AUROC=" + Fmt(m.up) + " clean AUROC=" +
               Fmt(m.lp) + " (need clean <= " + Fmt(kMaxLockedAuroc) + ")");
  });

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d criteria failed, %.0fs\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
