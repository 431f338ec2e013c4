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

// modellock: command-line front end for the locking pipeline.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "modellock/attacks.h"
#include "modellock/error.h"
#include "modellock/evaluator.h"
#include "modellock/experiment.h"
#include "modellock/external_editor.h"
#include "modellock/hashing.h"
#include "modellock/locksmith.h"
#include "modellock/mltd.h"
#include "modellock/shapeset.h"
#include "modellock/trainer.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace modellock;

struct KeyFlags {
  std::string prompt = "with oil pastel";
  std::optional<std::string> salt;
  float gamma = 0.5f;
  std::string endpoint;

  void Register(CLI::App* app) {
    app->add_option("--prompt", prompt, "key prompt");
    app->add_option("--salt", salt, "secret salt (or set " + std::string(kSaltEnvVar) + ")");
    app->add_option("--gamma", gamma, "blending ratio")->check(CLI::Range(0.0f, 1.0f));
    app->add_option("--endpoint", endpoint, "external editor (http://host:port or stdio:cmd)");
  }
  EditKey Key() const {
    std::optional<std::string> s = salt;
    if (const char* env = std::getenv(kSaltEnvVar); env != nullptr && !s) s = std::string(env);
    if (s && s->empty()) s.reset();
    return prompt.empty() ? EditKey::EmptyPrompt(s) : EditKey(prompt, s);
  }
  EditorConfig Editor() const {
    EditorConfig e;
    e.gamma = gamma;
    if (!endpoint.empty()) {
      e.kind = EditorKind::kExternal;
      e.endpoint = endpoint;
    }
    return e;
  }
};

void WriteText(const fs::path& path, const std::string& text) {
  WriteFileBytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

ExperimentConfig LoadConfigOrDefault(const std::string& path) {
  return path.empty() ? ExperimentConfig::FromJson(json::object()) : LoadExperimentConfig(path);
}

std::vector<double> ParseGrid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      grid.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kConfig, "bad grid value '" + item + "'");
    }
  }
  return grid;
}

void Log(std::string_view line) { std::cerr << line << '\n'; }

int RunServeCheck(const std::string& endpoint) {
  auto client = ExternalEditorClient::Connect(endpoint);
  int failures = 0;
  const json caps = client->Capabilities();
  const auto problems = CheckCapabilities(caps);
  std::cout << "capabilities " << (problems.empty() ? "ok" : "FAIL") << '\n';
  for (const auto& p : problems) std::cout << "  " << p << '\n';
  failures += !problems.empty();

  std::vector<float> px(8 * 8 * 3);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<float>(i % 17) / 16.0f;
  const Image probe(8, 8, 3, std::move(px));
  EditorConfig cfg;
  const Image echoed = client->Edit(probe, EditKey("serve-check"), cfg, 1, EditMode::kEcho);
  const bool echo_ok = ImageDigest(echoed) == ImageDigest(probe);
  std::cout << "echo " << (echo_ok ? "ok" : "FAIL") << '\n';
  failures += !echo_ok;

  const json modes = caps.value("modes", json::array());
  if (std::find(modes.begin(), modes.end(), "edit") != modes.end()) {
    const EditKey key("with oil pastel");
    const Image remote = client->Edit(probe, key, cfg, 1, EditMode::kEdit);
    const bool same = ImageDigest(remote) == ImageDigest(ApplyEdit(probe, DeriveEditParams(key), 1));
    std::cout << "edit " << (same ? "matches in-process editor" : "differs from in-process editor")
              << '\n';
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model locking toolkit: keyed dataset editing, training, evaluation and attacks"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "render a ShapeSet benchmark to train.mltd/test.mltd");
  std::string gen_task = "classification", gen_out = "data/shapeset";
  int gen_classes = 0;
  ShapeSetSpec gen_spec;
  gen->add_option("--task", gen_task, "classification | multilabel | segmentation");
  gen->add_option("--classes", gen_classes, "shape classes (label bits for multilabel)");
  gen->add_option("--train", gen_spec.train_count, "training samples");
  gen->add_option("--test", gen_spec.test_count, "test samples");
  gen->add_option("--size", gen_spec.height, "image side in pixels");
  gen->add_option("--noise", gen_spec.noise, "Gaussian noise sigma");
  gen->add_option("--seed", gen_spec.seed, "generator seed");
  gen->add_option("--out", gen_out, "output directory");

  // lock
  auto* lock = app.add_subcommand("lock", "lock a clean MLTD dataset");
  std::string lock_in, lock_out, lock_report, lock_trigger;
  float lock_alpha = 0.95f;
  std::uint64_t lock_seed = 0;
  KeyFlags lock_key;
  lock->add_option("--in", lock_in, "clean MLTD file")->required();
  lock->add_option("--out", lock_out, "locked MLTD file")->required();
  lock->add_option("--report", lock_report, "lock report JSON (default <out>.json)");
  lock->add_option("--alpha", lock_alpha, "fraction of samples edited");
  lock->add_option("--seed", lock_seed, "partition and edit seed");
  lock->add_option("--trigger", lock_trigger, "backdoor trigger JSON instead of the keyed editor");
  lock_key.Register(lock);

  // train
  auto* train = app.add_subcommand("train", "train a model on an MLTD dataset");
  std::string train_data, train_out, train_arch;
  ModelSpec train_spec;
  TrainConfig train_cfg;
  train_cfg.epochs = 10;
  train->add_option("--data", train_data, "MLTD training set")->required();
  train->add_option("--out", train_out, "checkpoint path")->required();
  train->add_option("--arch", train_arch, "linear | mlp | perpixel (default by task)");
  train->add_option("--hidden", train_spec.hidden_units, "MLP hidden units");
  train->add_option("--epochs", train_cfg.epochs, "epochs");
  train->add_option("--batch", train_cfg.batch_size, "batch size");
  train->add_option("--lr", train_cfg.learning_rate, "learning rate (perpixel default: H*W)");
  train->add_option("--momentum", train_cfg.momentum, "momentum");
  train->add_option("--init-seed", train_spec.init_seed, "weight init seed");
  train->add_option("--shuffle-seed", train_cfg.shuffle_seed, "batch shuffle seed");

  // eval
  auto* eval = app.add_subcommand("eval", "report UP/LP of a checkpoint");
  std::string eval_model, eval_test, eval_out;
  std::uint64_t eval_seed = 0;
  KeyFlags eval_key;
  eval->add_option("--model", eval_model, "checkpoint")->required();
  eval->add_option("--test", eval_test, "clean MLTD test set")->required();
  eval->add_option("--seed", eval_seed, "per-sample edit seed");
  eval->add_option("--out", eval_out, "metrics JSON path");
  eval_key.Register(eval);

  // attack
  auto* attack = app.add_subcommand("attack", "unlocking attacks");
  attack->require_subcommand(1);
  std::string atk_model, atk_test, atk_out = "runs/attack", atk_pool,
                                   atk_leaked;
  float atk_gamma = 0.5f;
  std::uint64_t atk_seed = 0;
  int atk_k = 10, atk_clean = 40;
  auto* rp = attack->add_subcommand("rp", "random prompt attack");
  auto* sp = attack->add_subcommand("sp", "surrogate prompt attack");
  for (auto* sub : {rp, sp}) {
    sub->add_option("--model", atk_model, "locked checkpoint")->required();
    sub->add_option("--test", atk_test, "clean MLTD test set")->required();
    sub->add_option("--gamma", atk_gamma, "public blending ratio");
    sub->add_option("--seed", atk_seed, "evaluation seed");
    sub->add_option("--out", atk_out, "output directory");
  }
  rp->add_option("--pool", atk_pool, "prompt pool JSON (default: the shipped pool)");
  sp->add_option("--leaked", atk_leaked, "MLTD file holding leaked edited samples")->required();
  sp->add_option("--k", atk_k, "number of leaked images used");
  sp->add_option("--attacker-clean", atk_clean, "attacker clean images (tail of the test set)");

  // run / ablate
  auto* run = app.add_subcommand("run", "full experiment from a config document");
  auto* ablate = app.add_subcommand("ablate", "sweep gamma or alpha");
  std::string cfg_path, ablate_param, ablate_grid, out_override;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> epochs_override;
  bool with_rp = false, with_sp = false;
  for (auto* sub : {run, ablate}) {
    sub->add_option("--config", cfg_path, "experiment config JSON");
    sub->add_option("--out", out_override, "output directory (overrides config)");
    sub->add_option("--seed", seed_override, "global seed (overrides config)");
    sub->add_option("--epochs", epochs_override, "epochs (overrides config)");
  }
  run->add_flag("--rp", with_rp, "run the random prompt attack");
  run->add_flag("--sp", with_sp, "run the surrogate prompt attack");
  ablate->add_option("parameter", ablate_param, "gamma | alpha")
      ->required()
      ->check(CLI::IsMember({"gamma", "alpha"}));
  ablate->add_option("--grid", ablate_grid, "comma-separated values");

  // serve-check
  auto* serve = app.add_subcommand("serve-check", "probe an external editor service");
  std::string serve_endpoint;
  serve->add_option("endpoint", serve_endpoint, "http://host:port or stdio:<command>")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      gen_spec.task = ParseTask(gen_task);
      gen_spec.num_classes = gen_classes > 0 ? gen_classes : (gen_spec.task == TaskKind::kMultiLabel ? 4 : 3);
      gen_spec.width = gen_spec.height;
      ValidateShapeSetSpec(gen_spec);
      const ShapeSet s = GenerateShapeSet(gen_spec);
      SaveDataset(s.train, fs::path(gen_out) / "train.mltd");
      SaveDataset(s.test, fs::path(gen_out) / "test.mltd");
      WriteText(fs::path(gen_out) / "shapeset.json", gen_spec.ToJson().dump(2) + "\n");
      std::cout << "train " << HexDigest(DatasetDigest(s.train)) << "\ntest  "
                << HexDigest(DatasetDigest(s.test)) << '\n';
    } else if (lock->parsed()) {
      const Dataset clean = LoadDataset(lock_in);
      LockedDataset locked;
      if (!lock_trigger.empty()) {
        locked = BackdoorLockDataset(clean, TriggerSpec::FromJson(json::parse(lock_trigger)), lock_alpha,
                                     lock_seed);
      } else {
        LockConfig cfg;
        cfg.alpha = lock_alpha;
        cfg.key = lock_key.Key();
        cfg.editor = lock_key.Editor();
        cfg.seed = lock_seed;
        locked = LockDataset(clean, cfg);
      }
      SaveDataset(locked.dataset, lock_out);
      const std::string report = locked.report.ToJson().dump(2) + "\n";
      WriteText(lock_report.empty() ? lock_out + ".json" : lock_report, report);
      std::cout << report;
    } else if (train->parsed()) {
      const Dataset data = LoadDataset(train_data);
      if (data.samples.empty()) throw Error(ErrorCode::kInvalidArgument, "empty training set");
      const Image& im = data.samples.front().image;
      train_spec.arch = !train_arch.empty() ? ParseArch(train_arch)
                        : data.task == TaskKind::kSegmentation ? Arch::kPerPixelLinear
                                                                : Arch::kMlp;
      train_spec.height = im.height();
      train_spec.width = im.width();
      train_spec.channels = im.channels();
      train_spec.output_classes = static_cast<int>(data.num_classes);
      train_cfg.loss = DefaultLossFor(data.task);
      if (train_spec.arch == Arch::kPerPixelLinear && train->count("--lr") == 0) {
        train_cfg.learning_rate = kPerPixelStep * static_cast<float>(im.height() * im.width());
      }
      const TrainResult r = Train(InitModel(train_spec), data, train_cfg);
      SaveCheckpoint(r.model,
                     {{"train", train_cfg.ToJson()}, {"dataset_digest", HexDigest(DatasetDigest(data))}},
                     train_out);
      std::cout << "final loss " << r.loss_curve.back() << '\n';
    } else if (eval->parsed()) {
      const Model model = LoadCheckpoint(eval_model);
      const Dataset test = LoadDataset(eval_test);
      const Metrics m = UpLpReport(model, test, eval_key.Key(), eval_key.Editor(), eval_seed);
      const std::string doc = m.ToJson().dump(2) + "\n";
      if (!eval_out.empty()) WriteText(eval_out, doc);
      std::cout << doc;
    } else if (rp->parsed() || sp->parsed()) {
      const Model model = LoadCheckpoint(atk_model);
      const Dataset test = LoadDataset(atk_test);
      EditorConfig editor;
      editor.gamma = atk_gamma;
      json summary;
      if (rp->parsed()) {
        const RpResult r = RandomPromptAttack(model, test, PoolKeys(LoadPromptPool(atk_pool.empty() ? DefaultPromptPoolPath() : fs::path(atk_pool))), editor, atk_seed);
        WriteText(fs::path(atk_out) / "rp.csv", r.Csv());
        summary = r.Summary();
      } else {
        const Dataset leaked_set = LoadDataset(atk_leaked);
        std::vector<Image> leaked;
        for (const Sample& s : leaked_set.samples) {
          if (s.edited && leaked.size() < static_cast<std::size_t>(atk_k)) leaked.push_back(s.image);
        }
        Dataset attacker;
        attacker.task = test.task;
        attacker.num_classes = test.num_classes;
        const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(atk_clean), test.size());
        attacker.samples.assign(test.samples.end() - static_cast<long>(n), test.samples.end());
        const SpResult r = SurrogatePromptAttack(model, leaked, attacker, test, editor, atk_seed);
        WriteText(fs::path(atk_out) / "sp.csv", r.Csv(SurrogateLattice()));
        summary = r.Summary();
      }
      WriteText(fs::path(atk_out) / "summary.json", summary.dump(2) + "\n");
      std::cout << summary.dump(2) << '\n';
    } else if (run->parsed() || ablate->parsed()) {
      ExperimentConfig cfg = LoadConfigOrDefault(cfg_path);
      if (!out_override.empty()) cfg.output_dir = out_override;
      if (seed_override) cfg.seed = *seed_override;
      if (epochs_override) cfg.train.epochs = *epochs_override;
      if (run->parsed()) {
        cfg.attacks.random_prompt = cfg.attacks.random_prompt || with_rp;
        cfg.attacks.surrogate_prompt = cfg.attacks.surrogate_prompt || with_sp;
        std::cout << RunExperiment(cfg, Log).summary;
      } else {
        const AblationParam param = ParseAblation(ablate_param);
        std::vector<double> grid = ParseGrid(ablate_grid);
        if (grid.empty()) {
          grid = param == AblationParam::kGamma ? std::vector<double>{0, 0.25, 0.5, 0.75, 1.0}
                                                : std::vector<double>{0.5, 0.8, 0.95, 0.99};
        }
        std::cout << Ablate(cfg, param, grid, Log).summary;
      }
    } else if (serve->parsed()) {
      return RunServeCheck(serve_endpoint);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
