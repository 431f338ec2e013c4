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

#include "modellock/experiment.h"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "modellock/error.h"
#include "modellock/hashing.h"
#include "modellock/mltd.h"

namespace modellock {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::uint64_t kLockStream = 1;
constexpr std::uint64_t kInitStream = 2;
constexpr std::uint64_t kShuffleStream = 3;

void RejectUnknownKeys(const json& doc, std::string_view where,
                       std::initializer_list<std::string_view> allowed) {
  if (!doc.is_object()) throw Error(ErrorCode::kConfig, std::string(where) + " must be an object");
  for (const auto& [key, _] : doc.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorCode::kConfig, "unknown key '" + key + "' in " + std::string(where));
    }
  }
}

std::string PolicyName(MultiLabelLockPolicy p) {
  return p == MultiLabelLockPolicy::kClearAndFlag ? "clear-and-flag" : "keep-and-flag";
}

MultiLabelLockPolicy ParsePolicy(const std::string& name) {
  if (name == "clear-and-flag") return MultiLabelLockPolicy::kClearAndFlag;
  if (name == "keep-and-flag") return MultiLabelLockPolicy::kKeepAndFlag;
  throw Error(ErrorCode::kConfig, "unknown multi-label policy '" + name + "'");
}

// Error::what() carries "<code>: " in front of the message.
std::string StripCode(const Error& e) {
  const std::string what = e.what();
  const std::string prefix = std::string(ErrorCodeName(e.code())) + ": ";
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

template <typename F>
auto Stage(std::string_view name, const Logger& log, F&& body) -> decltype(body()) {
  if (log) log("stage " + std::string(name));
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), "stage '" + std::string(name) + "': " + StripCode(e));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, "stage '" + std::string(name) + "': " + e.what());
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorCode::kIo, "stage '" + std::string(name) + "': " + e.what());
  }
}

void WriteText(const fs::path& path, const std::string& text) {
  WriteFileBytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string FormatRate(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << v;
  return os.str();
}

int OutputsFor(const Dataset& data, bool locked) {
  return static_cast<int>(data.num_classes) + (locked ? 1 : 0);
}

}  // namespace

ExperimentConfig ExperimentConfig::Default() {
  ExperimentConfig cfg;
  cfg.lock.key = EditKey("with oil pastel", std::string("demo-lock"));
  cfg.lock.alpha = 0.95f;
  cfg.lock.editor.gamma = 0.5f;
  cfg.model.arch = Arch::kMlp;
  cfg.model.hidden_units = 128;
  cfg.train.epochs = 10;
  cfg.train.batch_size = 64;
  cfg.train.learning_rate = 0.01f;
  cfg.train.momentum = 0.9f;
  return cfg;
}

ExperimentConfig ExperimentConfig::FromJson(const json& doc) {
  ExperimentConfig cfg = Default();
  RejectUnknownKeys(doc, "config",
                    {"seed", "output_dir", "dataset", "lock", "model", "train", "baseline", "attacks"});
  try {
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.output_dir = doc.value("output_dir", cfg.output_dir.string());
    cfg.baseline = doc.value("baseline", cfg.baseline);

    if (doc.contains("dataset")) {
      const json& d = doc["dataset"];
      RejectUnknownKeys(d, "dataset", {"source", "shapeset", "train", "test"});
      const std::string source = d.value("source", "shapeset");
      if (source == "shapeset") {
        if (d.contains("shapeset")) cfg.shapeset = ShapeSetSpec::FromJson(d["shapeset"]);
      } else if (source == "mltd") {
        cfg.train_path = d.at("train").get<std::string>();
        cfg.test_path = d.at("test").get<std::string>();
      } else {
        throw Error(ErrorCode::kConfig, "unknown dataset source '" + source + "'");
      }
    }

    std::string prompt = cfg.lock.key.prompt();
    std::optional<std::string> salt = cfg.lock.key.salt();
    if (doc.contains("lock")) {
      const json& l = doc["lock"];
      RejectUnknownKeys(l, "lock",
                        {"prompt", "salt", "alpha", "gamma", "editor", "endpoint", "steps",
                         "guidance", "image_guidance", "multilabel_policy", "trigger"});
      prompt = l.value("prompt", prompt);
      if (l.contains("salt")) {
        salt = l["salt"].is_null() ? std::nullopt : std::optional(l["salt"].get<std::string>());
      }
      cfg.lock.alpha = l.value("alpha", cfg.lock.alpha);
      EditorConfig& e = cfg.lock.editor;
      e.gamma = l.value("gamma", e.gamma);
      const std::string kind = l.value("editor", "procedural");
      if (kind == "procedural") {
        e.kind = EditorKind::kProcedural;
      } else if (kind == "external") {
        e.kind = EditorKind::kExternal;
      } else {
        throw Error(ErrorCode::kConfig, "unknown editor kind '" + kind + "'");
      }
      if (l.contains("endpoint") && !l["endpoint"].is_null()) e.endpoint = l["endpoint"].get<std::string>();
      e.steps = l.value("steps", e.steps);
      e.guidance = l.value("guidance", e.guidance);
      e.image_guidance = l.value("image_guidance", e.image_guidance);
      if (l.contains("multilabel_policy")) {
        cfg.lock.policy.multilabel = ParsePolicy(l["multilabel_policy"].get<std::string>());
      }
      if (l.contains("trigger") && !l["trigger"].is_null()) {
        cfg.trigger = TriggerSpec::FromJson(l["trigger"]);
      }
    }
    if (const char* env = std::getenv(kSaltEnvVar); env != nullptr) salt = std::string(env);
    if (salt && salt->empty()) salt.reset();
    cfg.lock.key = prompt.empty() ? EditKey::EmptyPrompt(salt) : EditKey(prompt, salt);

    if (doc.contains("model")) {
      const json& m = doc["model"];
      RejectUnknownKeys(m, "model", {"arch", "hidden_units"});
      if (m.contains("arch")) {
        cfg.model.arch = ParseArch(m["arch"].get<std::string>());
        cfg.arch_given = true;
      }
      cfg.model.hidden_units = m.value("hidden_units", cfg.model.hidden_units);
    }
    if (doc.contains("train")) {
      const json& t = doc["train"];
      RejectUnknownKeys(t, "train", {"epochs", "batch_size", "learning_rate", "momentum"});
      cfg.train.epochs = t.value("epochs", cfg.train.epochs);
      cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
      if (t.contains("learning_rate")) {
        cfg.train.learning_rate = t["learning_rate"].get<float>();
        cfg.learning_rate_given = true;
      }
      cfg.train.momentum = t.value("momentum", cfg.train.momentum);
    }
    if (doc.contains("attacks")) {
      const json& a = doc["attacks"];
      RejectUnknownKeys(a, "attacks", {"rp", "sp", "pool", "sp_leaked", "sp_attacker_clean"});
      AttackToggles& at = cfg.attacks;
      at.random_prompt = a.value("rp", at.random_prompt);
      at.surrogate_prompt = a.value("sp", at.surrogate_prompt);
      at.pool_path = a.value("pool", at.pool_path.string());
      at.sp_leaked = a.value("sp_leaked", at.sp_leaked);
      at.sp_attacker_clean = a.value("sp_attacker_clean", at.sp_attacker_clean);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("bad experiment config: ") + e.what());
  }
  return cfg;
}

json ExperimentConfig::ToJson() const {
  json dataset;
  if (train_path) {
    dataset = {{"source", "mltd"}, {"train", train_path->string()}, {"test", test_path->string()}};
  } else {
    dataset = {{"source", "shapeset"}, {"shapeset", shapeset.ToJson()}};
  }
  json lock_doc = {{"prompt", lock.key.prompt()},
                   {"salt_digest", lock.key.salt() ? json(HexDigest(StableHash64(*lock.key.salt())))
                                                   : json(nullptr)},
                   {"alpha", lock.alpha},
                   {"gamma", lock.editor.gamma},
                   {"editor", lock.editor.kind == EditorKind::kProcedural ? "procedural" : "external"},
                   {"endpoint", lock.editor.endpoint ? json(*lock.editor.endpoint) : json(nullptr)},
                   {"steps", lock.editor.steps},
                   {"guidance", lock.editor.guidance},
                   {"image_guidance", lock.editor.image_guidance},
                   {"multilabel_policy", PolicyName(lock.policy.multilabel)},
                   {"trigger", trigger ? trigger->ToJson() : json(nullptr)}};
  return {{"seed", seed},
          {"output_dir", output_dir.string()},
          {"dataset", dataset},
          {"lock", lock_doc},
          {"model", {{"arch", ArchName(model.arch)}, {"hidden_units", model.hidden_units}}},
          {"train",
           {{"epochs", train.epochs},
            {"batch_size", train.batch_size},
            {"learning_rate", learning_rate_given ? json(train.learning_rate) : json("default")},
            {"momentum", train.momentum}}},
          {"baseline", baseline},
          {"attacks",
           {{"rp", attacks.random_prompt},
            {"sp", attacks.surrogate_prompt},
            {"pool", attacks.pool_path.string()},
            {"sp_leaked", attacks.sp_leaked},
            {"sp_attacker_clean", attacks.sp_attacker_clean}}}};
}

ExperimentConfig LoadExperimentConfig(const fs::path& path) {
  const auto bytes = ReadFileBytes(path);
  const json doc = json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::kConfig, "config is not valid JSON: " + path.string());
  return ExperimentConfig::FromJson(doc);
}

std::uint64_t LockSeed(const ExperimentConfig& cfg) { return MixSeed(cfg.seed, kLockStream); }
std::uint64_t InitSeed(const ExperimentConfig& cfg) { return MixSeed(cfg.seed, kInitStream); }
std::uint64_t ShuffleSeed(const ExperimentConfig& cfg) { return MixSeed(cfg.seed, kShuffleStream); }

void ValidateExperimentConfig(const ExperimentConfig& cfg) {
  if (cfg.train_path.has_value() != cfg.test_path.has_value()) {
    throw Error(ErrorCode::kConfig, "MLTD source needs both train and test paths");
  }
  if (!cfg.train_path) {
    ValidateShapeSetSpec(cfg.shapeset);
    CheckLockable(static_cast<std::size_t>(cfg.shapeset.train_count), cfg.lock.alpha);
  } else if (!(cfg.lock.alpha > 0.0f && cfg.lock.alpha < 1.0f)) {
    CheckLockable(1, cfg.lock.alpha);
  }
  if (cfg.trigger) {
    ValidateTriggerSpec(*cfg.trigger);
  } else {
    ValidateEditorConfig(cfg.lock.editor);
  }
  ValidateTrainConfig(cfg.train);
  if (cfg.model.arch == Arch::kMlp && cfg.model.hidden_units < 1) {
    throw Error(ErrorCode::kConfig, "hidden_units must be positive");
  }
  if (cfg.attacks.surrogate_prompt && (cfg.attacks.sp_leaked < 1 || cfg.attacks.sp_attacker_clean < 1)) {
    throw Error(ErrorCode::kConfig, "surrogate attack needs at least one leaked and one clean image");
  }
  if (cfg.output_dir.empty()) throw Error(ErrorCode::kConfig, "output_dir is empty");
}

ExperimentData LoadExperimentData(const ExperimentConfig& cfg) {
  if (cfg.train_path) {
    ExperimentData data{LoadDataset(*cfg.train_path), LoadDataset(*cfg.test_path)};
    if (data.train.task != data.test.task || data.train.num_classes != data.test.num_classes) {
      throw Error(ErrorCode::kTaskMismatch, "train and test files disagree on task or classes");
    }
    if (IsLocked(data.train) || IsLocked(data.test)) {
      throw Error(ErrorCode::kConfig, "experiment inputs must be clean datasets");
    }
    CheckLockable(data.train.size(), cfg.lock.alpha);
    return data;
  }
  ShapeSet s = GenerateShapeSet(cfg.shapeset);
  return {std::move(s.train), std::move(s.test)};
}

ModelSpec ResolveModelSpec(const ExperimentConfig& cfg, const Dataset& data, int output_classes) {
  if (data.samples.empty()) throw Error(ErrorCode::kInvalidArgument, "empty dataset");
  ModelSpec spec = cfg.model;
  if (!cfg.arch_given) {
    spec.arch = data.task == TaskKind::kSegmentation ? Arch::kPerPixelLinear : Arch::kMlp;
  }
  const Image& im = data.samples.front().image;
  spec.height = im.height();
  spec.width = im.width();
  spec.channels = im.channels();
  spec.output_classes = output_classes;
  spec.init_seed = InitSeed(cfg);
  ValidateModelSpec(spec);
  return spec;
}

TrainConfig ResolveTrainConfig(const ExperimentConfig& cfg, const ModelSpec& spec, TaskKind task) {
  TrainConfig tc = cfg.train;
  tc.loss = DefaultLossFor(task);
  tc.shuffle_seed = ShuffleSeed(cfg);
  if (spec.arch == Arch::kPerPixelLinear && !cfg.learning_rate_given) {
    tc.learning_rate = kPerPixelStep * static_cast<float>(spec.height * spec.width);
  }
  return tc;
}

ImageTransform UnlockTransform(const ExperimentConfig& cfg) {
  if (cfg.trigger) return TriggerTransform(*cfg.trigger);
  return MakeKeyedTransform(cfg.lock.key, cfg.lock.editor);
}

fs::path DefaultPromptPoolPath() { return fs::path(MODELLOCK_SOURCE_DIR) / "data" / "prompt_pool.json"; }

std::string FileDigest(const fs::path& path) { return HexDigest(StableHash64(ReadFileBytes(path))); }

ExperimentReport RunExperiment(const ExperimentConfig& cfg, const Logger& log,
                               std::optional<double> baseline_override) {
  Stage("config", log, [&] {
    ValidateExperimentConfig(cfg);
    fs::create_directories(cfg.output_dir);
    return 0;
  });
  const fs::path out = cfg.output_dir;
  json artifacts = json::object();
  auto record = [&](const std::string& name) { artifacts[name] = FileDigest(out / name); };

  const ExperimentData data = Stage("data", log, [&] { return LoadExperimentData(cfg); });
  const ModelSpec clean_spec = Stage("data", log, [&] {
    return ResolveModelSpec(cfg, data.train, OutputsFor(data.train, false));
  });
  const TrainConfig train_cfg = ResolveTrainConfig(cfg, clean_spec, data.train.task);

  std::optional<double> baseline = baseline_override;
  if (!baseline && cfg.baseline) {
    baseline = Stage("baseline", log, [&] {
      const TrainResult r = Train(InitModel(clean_spec), data.train, train_cfg);
      SaveCheckpoint(r.model, {{"role", "baseline"}}, out / "baseline.ckpt");
      record("baseline.ckpt");
      return TaskScore(r.model, data.test);
    });
  }

  const std::uint64_t lock_seed = LockSeed(cfg);
  const LockedDataset locked = Stage("lock", log, [&] {
    LockedDataset l = cfg.trigger
                          ? BackdoorLockDataset(data.train, *cfg.trigger, cfg.lock.alpha, lock_seed,
                                                cfg.lock.policy)
                          : LockDataset(data.train, [&] {
                              LockConfig lc = cfg.lock;
                              lc.seed = lock_seed;
                              return lc;
                            }());
    SaveDataset(l.dataset, out / "locked_train.mltd");
    record("locked_train.mltd");
    return l;
  });

  const TrainResult trained = Stage("train", log, [&] {
    const ModelSpec spec = ResolveModelSpec(cfg, data.train, OutputsFor(data.train, true));
    TrainResult r = Train(InitModel(spec), locked.dataset, train_cfg);
    SaveCheckpoint(r.model,
                   {{"role", "locked"},
                    {"train", train_cfg.ToJson()},
                    {"locked_dataset_digest", HexDigest(locked.report.dataset_digest)}},
                   out / "model.ckpt");
    record("model.ckpt");
    return r;
  });

  const ImageTransform unlock = UnlockTransform(cfg);
  const Metrics metrics = Stage("evaluate", log, [&] {
    return UpLpReport(trained.model, data.test, unlock, lock_seed);
  });

  json attacks = json::object();
  if (cfg.attacks.random_prompt) {
    attacks["rp"] = Stage("attack-rp", log, [&] {
      const RpResult rp = RandomPromptAttack(trained.model, data.test,
                                             PoolKeys(LoadPromptPool(cfg.attacks.pool_path.empty()
                                                                          ? DefaultPromptPoolPath()
                                                                          : cfg.attacks.pool_path)),
                                             cfg.lock.editor, lock_seed);
      WriteText(out / "rp.csv", rp.Csv());
      record("rp.csv");
      return rp.Summary();
    });
  }
  if (cfg.attacks.surrogate_prompt) {
    attacks["sp"] = Stage("attack-sp", log, [&] {
      std::vector<Image> leaked;
      for (const Sample& s : locked.dataset.samples) {
        if (s.edited && leaked.size() < static_cast<std::size_t>(cfg.attacks.sp_leaked)) {
          leaked.push_back(s.image);
        }
      }
      // The attacker's own clean images: the tail of the test split.
      Dataset attacker;
      attacker.task = data.test.task;
      attacker.num_classes = data.test.num_classes;
      const std::size_t n = std::min<std::size_t>(cfg.attacks.sp_attacker_clean, data.test.size());
      attacker.samples.assign(data.test.samples.end() - static_cast<long>(n), data.test.samples.end());
      const SpResult sp = SurrogatePromptAttack(trained.model, leaked, attacker, data.test,
                                                cfg.lock.editor, lock_seed);
      WriteText(out / "sp.csv", sp.Csv(SurrogateLattice()));
      record("sp.csv");
      return sp.Summary();
    });
  }

  ExperimentReport report;
  Stage("report", log, [&] {
    json& doc = report.doc;
    doc["config"] = cfg.ToJson();
    doc["data"] = {{"task", TaskName(data.train.task)},
                   {"num_classes", data.train.num_classes},
                   {"train_count", data.train.size()},
                   {"test_count", data.test.size()},
                   {"train_digest", HexDigest(DatasetDigest(data.train))},
                   {"test_digest", HexDigest(DatasetDigest(data.test))}};
    doc["lock"] = locked.report.ToJson();
    doc["baseline"] = baseline ? json(*baseline) : json(nullptr);
    doc["train"] = {{"resolved", train_cfg.ToJson()}, {"loss_curve", trained.loss_curve}};
    doc["metrics"] = metrics.ToJson();
    if (data.train.task == TaskKind::kClassification) {
      doc["chance"] = 1.0 / static_cast<double>(data.train.num_classes + 1);
    }
    doc["attacks"] = attacks;
    doc["artifacts"] = artifacts;

    std::ostringstream s;
    s << "task            " << TaskName(data.train.task) << '\n'
      << "transform       " << locked.report.transform << '\n'
      << "edited/relabel  " << locked.report.edited << '/' << locked.report.relabeled << '\n';
    if (baseline) s << "baseline        " << FormatRate(*baseline) << '\n';
    s << "UP              " << FormatRate(metrics.up) << '\n'
      << "LP              " << FormatRate(metrics.lp) << '\n'
      << "lock rate       " << FormatRate(metrics.lock_class_rate) << '\n';
    if (attacks.contains("rp")) {
      s << "RP max/mean     " << FormatRate(attacks["rp"]["max_up_rp"].get<double>()) << '/'
        << FormatRate(attacks["rp"]["mean_up_rp"].get<double>()) << '\n';
    }
    if (attacks.contains("sp")) {
      s << "SP UP           " << FormatRate(attacks["sp"]["up_sp"].get<double>()) << " ("
        << attacks["sp"]["fitted_family"].get<std::string>() << ")\n";
    }
    report.summary = s.str();
    WriteText(out / "report.json", doc.dump(2) + "\n");
    WriteText(out / "summary.txt", report.summary);
    return 0;
  });
  return report;
}

std::string_view AblationName(AblationParam param) {
  return param == AblationParam::kGamma ? "gamma" : "alpha";
}

AblationParam ParseAblation(std::string_view name) {
  if (name == "gamma") return AblationParam::kGamma;
  if (name == "alpha") return AblationParam::kAlpha;
  throw Error(ErrorCode::kConfig, "unknown ablation parameter '" + std::string(name) + "'");
}

ExperimentReport Ablate(const ExperimentConfig& cfg, AblationParam param,
                        const std::vector<double>& grid, const Logger& log) {
  if (grid.empty()) throw Error(ErrorCode::kConfig, "ablation grid is empty");
  std::vector<ExperimentConfig> points;
  for (double v : grid) {
    ExperimentConfig p = cfg;
    std::ostringstream name;
    name << AblationName(param) << '_' << v;
    p.output_dir = cfg.output_dir / name.str();
    p.baseline = false;
    if (param == AblationParam::kGamma) {
      p.lock.editor.gamma = static_cast<float>(v);
    } else {
      p.lock.alpha = static_cast<float>(v);
    }
    ValidateExperimentConfig(p);
    points.push_back(std::move(p));
  }

  std::optional<double> baseline;
  if (cfg.baseline) {
    baseline = Stage("baseline", log, [&] {
      fs::create_directories(cfg.output_dir);
      const ExperimentData data = LoadExperimentData(cfg);
      const ModelSpec spec = ResolveModelSpec(cfg, data.train, OutputsFor(data.train, false));
      const TrainConfig tc = ResolveTrainConfig(cfg, spec, data.train.task);
      return TaskScore(Train(InitModel(spec), data.train, tc).model, data.test);
    });
  }

  ExperimentReport report;
  json rows = json::array();
  std::ostringstream csv;
  csv << AblationName(param) << ",up,lp,lock_class_rate\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (log) log(std::string(AblationName(param)) + " = " + FormatRate(grid[i]));
    const ExperimentReport r = RunExperiment(points[i], log, baseline);
    const json& m = r.doc["metrics"];
    rows.push_back({{"value", grid[i]},
                    {"up", m["up"]},
                    {"lp", m["lp"]},
                    {"lock_class_rate", m["lock_class_rate"]},
                    {"dir", points[i].output_dir.filename().string()}});
    csv << grid[i] << ',' << m["up"].get<double>() << ',' << m["lp"].get<double>() << ','
        << m["lock_class_rate"].get<double>() << '\n';
  }
  report.doc = {{"parameter", AblationName(param)},
                {"baseline", baseline ? json(*baseline) : json(nullptr)},
                {"config", cfg.ToJson()},
                {"points", rows}};
  std::ostringstream s;
  s << AblationName(param) << "      UP      LP\n";
  for (const auto& row : rows) {
    s << FormatRate(row["value"].get<double>()) << "  " << FormatRate(row["up"].get<double>()) << "  "
      << FormatRate(row["lp"].get<double>()) << '\n';
  }
  if (baseline) s << "baseline " << FormatRate(*baseline) << '\n';
  report.summary = s.str();
  WriteText(cfg.output_dir / "sweep.json", report.doc.dump(2) + "\n");
  WriteText(cfg.output_dir / "sweep.csv", csv.str());
  return report;
}

std::vector<std::string> VerifyArtifacts(const fs::path& report_path) {
  const auto bytes = ReadFileBytes(report_path);
  const json doc = json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (doc.is_discarded() || !doc.contains("artifacts")) {
    throw Error(ErrorCode::kFormat, "not a report document: " + report_path.string());
  }
  std::vector<std::string> problems;
  const fs::path dir = report_path.parent_path();
  for (const auto& [name, digest] : doc["artifacts"].items()) {
    const fs::path p = dir / name;
    if (!fs::exists(p)) {
      problems.push_back(name + ": missing");
    } else if (FileDigest(p) != digest.get<std::string>()) {
      problems.push_back(name + ": digest mismatch");
    }
  }
  return problems;
}

}  // namespace modellock
