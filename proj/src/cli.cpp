#include "lggnet/cli.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "lggnet/checkpoint.hpp"

namespace lggnet::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------- config parsing

void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError("config section '" + where + "' must be an object");
}

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (keys.count(key) == 0) {
      throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

template <typename V>
void read(const json& j, const char* key, const std::string& where, V& into) {
  if (!j.contains(key)) return;
  const std::string name = where.empty() ? key : where + "." + key;
  try {
    const json& v = j.at(key);
    if constexpr (std::is_same_v<V, bool>) {
      if (!v.is_boolean()) throw ConfigError("config key '" + name + "' must be a boolean");
    } else if constexpr (std::is_integral_v<V>) {
      if (!v.is_number_integer()) throw ConfigError("config key '" + name + "' must be an integer");
      if constexpr (std::is_unsigned_v<V>) {
        if (v.is_number_integer() && !v.is_number_unsigned()) {
          throw ConfigError("config key '" + name + "' must be non-negative");
        }
      }
    } else if constexpr (std::is_floating_point_v<V>) {
      if (!v.is_number()) throw ConfigError("config key '" + name + "' must be a number");
    } else {
      if (!v.is_string()) throw ConfigError("config key '" + name + "' must be a string");
    }
    into = v.get<V>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + name + "': " + e.what());
  }
}

void read_path(const json& j, const char* key, const std::string& where, fs::path& into) {
  std::string s = into.string();
  read(j, key, where, s);
  into = s;
}

std::string monitor_name(Monitor m) { return m == Monitor::ValLoss ? "val_loss" : "val_accuracy"; }

std::string optimizer_name(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::Momentum: return "momentum";
    default: return "adam";
  }
}

std::string write_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ArchitectureConfig RunConfig::architecture() const {
  ArchitectureConfig arch = preset == "reduced" ? reduced_architecture() : paper_architecture();
  arch.input_shape[2] = channels;
  arch.leaky_alpha = leaky_alpha;
  arch.block_dropout = block_dropout;
  arch.dense_dropout = dense_dropout;
  arch.noise_stddev = noise_stddev;
  return arch;
}

RunConfig parse_run_config(const json& doc, RunConfig c) {
  expect_object(doc, "<root>");
  reject_unknown(doc, "", {"seed", "output", "data", "model", "train"});
  read(doc, "seed", "", c.seed);
  read_path(doc, "output", "", c.output);

  if (doc.contains("data")) {
    const json& d = doc["data"];
    expect_object(d, "data");
    reject_unknown(d, "data", {"root", "classes", "exclude", "test_fraction", "validation_fraction"});
    read_path(d, "root", "data", c.data_root);
    if (d.contains("classes")) {
      const json& classes = d["classes"];
      expect_object(classes, "data.classes");
      c.classes.labels.clear();
      for (const auto& [name, label] : classes.items()) {
        if (!label.is_number_integer() || (label.get<int>() != 0 && label.get<int>() != 1)) {
          throw ConfigError("config key 'data.classes." + name + "' must be label 0 or 1");
        }
        c.classes.labels[name] = label.get<int>();
      }
    }
    if (d.contains("exclude")) {
      if (!d["exclude"].is_array()) throw ConfigError("config key 'data.exclude' must be a list of names");
      c.classes.excluded.clear();
      for (const json& name : d["exclude"]) {
        if (!name.is_string()) throw ConfigError("config key 'data.exclude' must be a list of names");
        c.classes.excluded.push_back(name.get<std::string>());
      }
    }
    read(d, "test_fraction", "data", c.test_fraction);
    read(d, "validation_fraction", "data", c.validation_fraction);
  }

  if (doc.contains("model")) {
    const json& m = doc["model"];
    expect_object(m, "model");
    reject_unknown(m, "model", {"preset", "channels", "leaky_alpha", "block_dropout", "dense_dropout", "noise_stddev"});
    read(m, "preset", "model", c.preset);
    read(m, "channels", "model", c.channels);
    read(m, "leaky_alpha", "model", c.leaky_alpha);
    read(m, "block_dropout", "model", c.block_dropout);
    read(m, "dense_dropout", "model", c.dense_dropout);
    read(m, "noise_stddev", "model", c.noise_stddev);
  }

  if (doc.contains("train")) {
    const json& t = doc["train"];
    expect_object(t, "train");
    reject_unknown(t, "train", {"batch_size", "max_epochs", "k", "threads", "retrain_full", "early_stopping",
                                "optimizer", "schedule", "augment"});
    TrainConfig& tc = c.train;
    read(t, "batch_size", "train", tc.batch_size);
    read(t, "max_epochs", "train", tc.max_epochs);
    read(t, "k", "train", tc.k);
    read(t, "threads", "train", tc.threads);
    read(t, "retrain_full", "train", tc.retrain_full);
    if (t.contains("early_stopping")) {
      const json& e = t["early_stopping"];
      expect_object(e, "train.early_stopping");
      reject_unknown(e, "train.early_stopping", {"enabled", "min_delta", "patience", "monitor"});
      read(e, "enabled", "train.early_stopping", tc.early_stop.enabled);
      read(e, "min_delta", "train.early_stopping", tc.early_stop.min_delta);
      read(e, "patience", "train.early_stopping", tc.early_stop.patience);
      std::string monitor = monitor_name(tc.early_stop.monitor);
      read(e, "monitor", "train.early_stopping", monitor);
      if (monitor == "val_loss") tc.early_stop.monitor = Monitor::ValLoss;
      else if (monitor == "val_accuracy") tc.early_stop.monitor = Monitor::ValAccuracy;
      else throw ConfigError("train.early_stopping.monitor must be 'val_loss' or 'val_accuracy'");
    }
    if (t.contains("optimizer")) {
      const json& o = t["optimizer"];
      expect_object(o, "train.optimizer");
      reject_unknown(o, "train.optimizer", {"kind", "learning_rate", "momentum", "beta1", "beta2", "epsilon"});
      std::string kind = optimizer_name(tc.optimizer.kind);
      read(o, "kind", "train.optimizer", kind);
      if (kind == "sgd") tc.optimizer.kind = OptimizerKind::Sgd;
      else if (kind == "momentum") tc.optimizer.kind = OptimizerKind::Momentum;
      else if (kind == "adam") tc.optimizer.kind = OptimizerKind::Adam;
      else throw ConfigError("train.optimizer.kind must be 'sgd', 'momentum' or 'adam'");
      read(o, "learning_rate", "train.optimizer", tc.schedule.initial);
      read(o, "momentum", "train.optimizer", tc.optimizer.momentum);
      read(o, "beta1", "train.optimizer", tc.optimizer.beta1);
      read(o, "beta2", "train.optimizer", tc.optimizer.beta2);
      read(o, "epsilon", "train.optimizer", tc.optimizer.epsilon);
    }
    if (t.contains("schedule")) {
      const json& s = t["schedule"];
      expect_object(s, "train.schedule");
      reject_unknown(s, "train.schedule", {"decay", "factor", "interval"});
      std::string decay = tc.schedule.decay == DecayKind::Step ? "step" : "exponential";
      read(s, "decay", "train.schedule", decay);
      if (decay == "step") tc.schedule.decay = DecayKind::Step;
      else if (decay == "exponential") tc.schedule.decay = DecayKind::Exponential;
      else throw ConfigError("train.schedule.decay must be 'step' or 'exponential'");
      read(s, "factor", "train.schedule", tc.schedule.factor);
      read(s, "interval", "train.schedule", tc.schedule.interval);
    }
    if (t.contains("augment")) {
      const json& a = t["augment"];
      expect_object(a, "train.augment");
      reject_unknown(a, "train.augment", {"flip_horizontal", "flip_vertical", "rotate", "max_rotation_degrees",
                                          "translate", "max_shift", "balance"});
      read(a, "flip_horizontal", "train.augment", tc.augment.flip_horizontal);
      read(a, "flip_vertical", "train.augment", tc.augment.flip_vertical);
      read(a, "rotate", "train.augment", tc.augment.rotate);
      read(a, "max_rotation_degrees", "train.augment", tc.augment.max_rotation_degrees);
      read(a, "translate", "train.augment", tc.augment.translate);
      read(a, "max_shift", "train.augment", tc.augment.max_shift);
      read(a, "balance", "train.augment", tc.augment.balance);
    }
  }
  return c;
}

void validate(const RunConfig& c) {
  if (c.preset != "paper" && c.preset != "reduced") throw ConfigError("model.preset must be 'paper' or 'reduced'");
  if (c.channels != 1 && c.channels != 3) throw ConfigError("model.channels must be 1 or 3");
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) throw ConfigError("data.test_fraction must lie in (0, 1)");
  if (!(c.validation_fraction > 0.0 && c.validation_fraction < 1.0)) {
    throw ConfigError("data.validation_fraction must lie in (0, 1)");
  }
  if (c.classes.labels.empty()) throw ConfigError("data.classes must map at least one directory");
  validate(c.train);
  build_layer_specs(c.architecture());
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(doc);
}

json to_json(const RunConfig& c) {
  json classes = json::object();
  for (const auto& [name, label] : c.classes.labels) classes[name] = label;
  const TrainConfig& t = c.train;
  return {
      {"seed", c.seed},
      {"output", c.output.string()},
      {"data",
       {{"root", c.data_root.string()},
        {"classes", classes},
        {"exclude", c.classes.excluded},
        {"test_fraction", c.test_fraction},
        {"validation_fraction", c.validation_fraction}}},
      {"model",
       {{"preset", c.preset},
        {"channels", c.channels},
        {"leaky_alpha", c.leaky_alpha},
        {"block_dropout", c.block_dropout},
        {"dense_dropout", c.dense_dropout},
        {"noise_stddev", c.noise_stddev}}},
      {"train",
       {{"batch_size", t.batch_size},
        {"max_epochs", t.max_epochs},
        {"k", t.k},
        {"threads", t.threads},
        {"retrain_full", t.retrain_full},
        {"early_stopping",
         {{"enabled", t.early_stop.enabled},
          {"min_delta", t.early_stop.min_delta},
          {"patience", t.early_stop.patience},
          {"monitor", monitor_name(t.early_stop.monitor)}}},
        {"optimizer",
         {{"kind", optimizer_name(t.optimizer.kind)},
          {"learning_rate", t.schedule.initial},
          {"momentum", t.optimizer.momentum},
          {"beta1", t.optimizer.beta1},
          {"beta2", t.optimizer.beta2},
          {"epsilon", t.optimizer.epsilon}}},
        {"schedule",
         {{"decay", t.schedule.decay == DecayKind::Step ? "step" : "exponential"},
          {"factor", t.schedule.factor},
          {"interval", t.schedule.interval}}},
        {"augment",
         {{"flip_horizontal", t.augment.flip_horizontal},
          {"flip_vertical", t.augment.flip_vertical},
          {"rotate", t.augment.rotate},
          {"max_rotation_degrees", t.augment.max_rotation_degrees},
          {"translate", t.augment.translate},
          {"max_shift", t.augment.max_shift},
          {"balance", t.augment.balance}}}}},
  };
}

std::string config_hash(const RunConfig& config) {
  json j = to_json(config);
  j.erase("output");
  // Thread count does not change results.
  j["train"].erase("threads");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string run_id(const RunConfig& config) {
  return "run-" + std::to_string(config.seed) + "-" + config_hash(config).substr(0, 8);
}

// ---------------------------------------------------------------- artifact writers

namespace {

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + file.string());
  out << text;
}

void write_history_csv(const fs::path& file, const std::vector<EpochRecord>& history) {
  std::ostringstream out;
  out << "epoch,train_loss,train_acc,val_loss,val_acc,lr,seconds\n";
  char line[256];
  for (const EpochRecord& r : history) {
    std::snprintf(line, sizeof line, "%zu,%.8g,%.8g,%.8g,%.8g,%.8g,%.4f\n", r.epoch, r.train_loss, r.train_accuracy,
                  r.val_loss, r.val_accuracy, r.learning_rate, r.seconds);
    out << line;
  }
  write_text(file, out.str());
}

json fold_json(const FoldSummary& f) {
  return {{"fold", f.fold},
          {"train_size", f.train_size},
          {"val_size", f.val_size},
          {"best_epoch", f.best_epoch},
          {"epochs_run", f.history.size()},
          {"stop_reason", std::string(to_string(f.stop_reason))},
          {"val_loss", f.val_loss},
          {"val_accuracy", f.val_accuracy},
          {"val_f1", f.val_f1}};
}

std::array<std::string, 2> class_names(const ClassMap& classes) {
  std::array<std::string, 2> names{"class 0", "class 1"};
  std::array<bool, 2> seen{false, false};
  for (const auto& [name, label] : classes.labels) {
    const auto l = static_cast<std::size_t>(label);
    names[l] = seen[l] ? names[l] + "+" + name : name;
    seen[l] = true;
  }
  return names;
}

json class_map_json(const ClassMap& classes) {
  json labels = json::object();
  for (const auto& [name, label] : classes.labels) labels[name] = label;
  return {{"classes", labels}, {"exclude", classes.excluded}};
}

ClassMap class_map_from_json(const json& j) {
  ClassMap out;
  out.labels.clear();
  for (const auto& [name, label] : j.at("classes").items()) out.labels[name] = label.get<int>();
  out.excluded = j.value("exclude", std::vector<std::string>{});
  return out;
}

ImageFormat format_of(const Shape& input) { return {input.at(0), input.at(1), input.at(2)}; }

struct Prepared {
  RunConfig config;
  fs::path run_dir;
  DatasetSplit split;
  LoadResult loaded;
};

Prepared prepare_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  Prepared p;
  p.config = config;
  const ArchitectureConfig arch = config.architecture();
  if (config.data_root.empty()) throw DataError("no data root given (data.root or --data-root)");
  p.loaded = load_directory(config.data_root, config.classes, format_of(arch.input_shape));
  for (const auto& s : p.loaded.skipped) err << "warning: skipped unreadable file " << s << '\n';
  Rng split_rng(Rng::mix_seed(config.seed, 1));
  p.split = split(p.loaded.samples, config.test_fraction, split_rng);

  p.run_dir = config.output / run_id(config);
  fs::create_directories(p.run_dir);
  write_text(p.run_dir / "config.json", to_json(config).dump(2) + "\n");
  out << "run directory: " << p.run_dir.string() << '\n';
  out << "samples: " << p.loaded.samples.size() << " (train " << p.split.train.size() << ", test "
      << p.split.test.size() << ")\n";
  return p;
}

void write_run_info(const fs::path& dir, const std::string& command, double seconds) {
  const json info = {{"command", command}, {"finished_at", write_timestamp()}, {"wall_seconds", seconds}};
  write_text(dir / "run_info.json", info.dump(2) + "\n");
}

json checkpoint_extra(const RunConfig& config, const MetricReport& test) {
  return {{"config", to_json(config)}, {"data", class_map_json(config.classes)}, {"metrics", to_json(test)}};
}

// ---------------------------------------------------------------- commands

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  Prepared p = prepare_run(config, out, err);

  Rng val_rng(Rng::mix_seed(config.seed, 2));
  DatasetSplit inner = split(p.split.train, config.validation_fraction, val_rng);
  std::vector<Sample> train_set = std::move(inner.train);
  if (config.train.augment.any_transform() || config.train.augment.balance) {
    Rng augment_rng(Rng::mix_seed(config.seed, 3));
    train_set = augment_dataset(train_set, augment_rng, config.train.augment);
  }

  Model<float> model = build_model<float>(config.architecture(), fold_seed(config.seed, 0), "train");
  const FitResult fitted = fit(model, train_set, inner.test, config.train);
  const Evaluation test = evaluate_detailed(model, p.split.test);

  write_history_csv(p.run_dir / "history.csv", fitted.history);
  save_checkpoint(model, p.run_dir / "checkpoint", checkpoint_extra(config, test.report));

  std::vector<ManifestRow> rows;
  for (const Sample& s : p.split.train) rows.push_back({s.path, s.label, "train", -1});
  for (const Sample& s : p.split.test) rows.push_back({s.path, s.label, "test", -1});
  write_manifest_csv(p.run_dir / "dataset.csv", rows);

  const json report_doc = {{"command", "train"},
                           {"run_id", run_id(config)},
                           {"config_hash", config_hash(config)},
                           {"best_epoch", fitted.best_epoch},
                           {"epochs_run", fitted.history.size()},
                           {"stop_reason", std::string(to_string(fitted.stop_reason))},
                           {"test_loss", test.mean_loss},
                           {"test", to_json(test.report)}};
  write_text(p.run_dir / "report.json", report_doc.dump(2) + "\n");
  write_run_info(p.run_dir, "train",
                 std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());

  out << "stopped: " << to_string(fitted.stop_reason) << " after " << fitted.history.size()
      << " epochs (best epoch " << fitted.best_epoch << ")\n\n";
  out << format_report(test.report, class_names(config.classes));
  return kOk;
}

int cmd_cv(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  Prepared p = prepare_run(config, out, err);

  if (p.split.train.size() < config.train.k) {
    throw DataError("training split has " + std::to_string(p.split.train.size()) + " samples, fewer than k = " +
                    std::to_string(config.train.k) + " folds");
  }
  CvResult<float> cv = cross_validate<float>(p.split.train, config.architecture(), config.train);
  const Evaluation test = evaluate_detailed(cv.model, p.split.test);

  fs::create_directories(p.run_dir / "folds");
  json folds = json::array();
  for (const FoldSummary& f : cv.folds) {
    write_history_csv(p.run_dir / "folds" / ("fold_" + std::to_string(f.fold) + "_history.csv"), f.history);
    folds.push_back(fold_json(f));
  }
  save_checkpoint(cv.model, p.run_dir / "checkpoint", checkpoint_extra(config, test.report));

  // Rebuild the fold plan membership for the dataset manifest.
  std::vector<std::size_t> indices(p.split.train.size());
  std::vector<int> labels(p.split.train.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    indices[i] = i;
    labels[i] = p.split.train[i].label;
  }
  Rng plan_rng(Rng::mix_seed(config.train.seed, 0xf01d));
  const FoldPlan plan = stratified_kfold(indices, labels, config.train.k, plan_rng);
  std::vector<ManifestRow> rows;
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    for (std::size_t i : plan.folds[f]) {
      rows.push_back({p.split.train[i].path, p.split.train[i].label, "train", static_cast<long>(f)});
    }
  }
  for (const Sample& s : p.split.test) rows.push_back({s.path, s.label, "test", -1});
  write_manifest_csv(p.run_dir / "dataset.csv", rows);

  const json cv_doc = {{"k", config.train.k},
                       {"selection_metric", "val_f1 (support-weighted)"},
                       {"selected_fold", cv.selected},
                       {"final_model", config.train.retrain_full ? "retrained on full training split" : "selected fold"},
                       {"folds", folds}};
  write_text(p.run_dir / "cv_summary.json", cv_doc.dump(2) + "\n");
  const json report_doc = {{"command", "cv"},
                           {"run_id", run_id(config)},
                           {"config_hash", config_hash(config)},
                           {"cross_validation", cv_doc},
                           {"test_loss", test.mean_loss},
                           {"test", to_json(test.report)}};
  write_text(p.run_dir / "report.json", report_doc.dump(2) + "\n");
  write_run_info(p.run_dir, "cv", std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());

  out << "folds:\n";
  for (const FoldSummary& f : cv.folds) {
    char line[160];
    std::snprintf(line, sizeof line, "  fold %zu  best epoch %3zu  val_loss %.4f  val_acc %.4f  val_f1 %.4f%s\n",
                  f.fold, f.best_epoch, f.val_loss, f.val_accuracy, f.val_f1, f.fold == cv.selected ? "  *" : "");
    out << line;
  }
  out << '\n' << format_report(test.report, class_names(config.classes));
  return kOk;
}

int cmd_eval(const fs::path& checkpoint, const std::optional<RunConfig>& config, const fs::path& data_root,
             const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  json manifest;
  Model<float> model = load_checkpoint<float>(checkpoint, &manifest);
  ClassMap classes;
  if (config) {
    classes = config->classes;
  } else if (manifest.contains("extra") && manifest["extra"].contains("data")) {
    classes = class_map_from_json(manifest["extra"]["data"]);
  }
  const fs::path root = !data_root.empty() ? data_root : (config ? config->data_root : fs::path{});
  if (root.empty()) throw DataError("no data root given (--data-root)");
  const LoadResult loaded = load_directory(root, classes, format_of(model.input_shape()));
  for (const auto& s : loaded.skipped) err << "warning: skipped unreadable file " << s << '\n';
  const Evaluation result = evaluate_detailed(model, loaded.samples);
  out << format_report(result.report, class_names(classes));
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const json doc = {{"command", "eval"},
                      {"checkpoint", checkpoint.string()},
                      {"test_loss", result.mean_loss},
                      {"test", to_json(result.report)}};
    write_text(out_dir / "report.json", doc.dump(2) + "\n");
  }
  return kOk;
}

int cmd_predict(const fs::path& checkpoint, const std::vector<std::string>& images, std::ostream& out) {
  Model<float> model = load_checkpoint<float>(checkpoint);
  for (const std::string& image : images) {
    const Prediction p = predict(model, image);
    char line[64];
    std::snprintf(line, sizeof line, ",%d,%.6f,%.6f\n", p.label, p.probabilities.at(0), p.probabilities.at(1));
    out << image << line;
  }
  return kOk;
}

int cmd_inspect(bool paper, bool reduced, const fs::path& checkpoint, std::ostream& out) {
  if (paper + reduced + !checkpoint.empty() != 1) {
    throw ConfigError("inspect needs exactly one of --paper-model, --reduced-model or --checkpoint");
  }
  if (!checkpoint.empty()) {
    const Model<float> model = load_checkpoint<float>(checkpoint);
    out << summary(model);
    return kOk;
  }
  // Only the architecture is needed; no weights are materialized.
  const ArchitectureConfig arch = paper ? paper_architecture() : reduced_architecture();
  out << summary(arch.input_shape, build_layer_specs(arch));
  return kOk;
}

int cmd_synth(const fs::path& out_dir, std::size_t positives, std::size_t negatives, std::size_t size,
              std::uint64_t seed, std::ostream& out) {
  if (out_dir.empty()) throw ConfigError("synth needs --out");
  Rng rng(seed);
  const std::vector<Sample> samples = make_blob_dataset(positives, negatives, size, rng);
  write_dataset(out_dir, samples);
  out << "wrote " << samples.size() << " images to " << out_dir.string() << '\n';
  return kOk;
}

}  // namespace

// ---------------------------------------------------------------- entry point

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"lggnet: from-scratch CNN for binary MRI slice classification"};
  app.require_subcommand(1);

  std::string config_path, data_root, out_dir, checkpoint, preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k, batch_size, max_epochs, threads;
  bool retrain_full = false;

  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--data-root", data_root, "Dataset root with one directory per class");
    sub->add_option("--out", out_dir, "Output directory for run artifacts");
    sub->add_option("--k", k, "Number of cross-validation folds");
    sub->add_option("--batch-size", batch_size, "Mini-batch size");
    sub->add_option("--max-epochs", max_epochs, "Epoch limit");
    sub->add_flag("--retrain-full", retrain_full, "Retrain the final model on the whole training split");
    sub->add_option("--threads", threads, "Worker threads (fold-level parallelism)");
    sub->add_option("--preset", preset, "Architecture preset: paper or reduced");
  };

  CLI::App* train = app.add_subcommand("train", "Split, train with early stopping, evaluate on the test split");
  add_run_flags(train);
  CLI::App* cv = app.add_subcommand("cv", "k-fold cross-validation, model selection, test evaluation");
  add_run_flags(cv);

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a labelled image directory");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
  eval->add_option("--data-root", data_root, "Dataset root");
  eval->add_option("--config", config_path, "JSON run configuration (class mapping)");
  eval->add_option("--out", out_dir, "Directory to write report.json into");

  std::vector<std::string> images;
  CLI::App* predict_cmd = app.add_subcommand("predict", "Classify images; prints path,label,p0,p1");
  predict_cmd->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
  predict_cmd->add_option("images", images, "Image files")->required();

  bool paper_model = false, reduced_model = false;
  CLI::App* inspect = app.add_subcommand("inspect", "Print the layer table and parameter count");
  inspect->add_flag("--paper-model", paper_model, "The 256x256 architecture");
  inspect->add_flag("--reduced-model", reduced_model, "The 32x32 test architecture");
  inspect->add_option("--checkpoint", checkpoint, "Checkpoint directory");

  std::size_t positives = 100, negatives = 100, size = 32;
  std::uint64_t synth_seed = 7;
  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic blob-vs-blank dataset");
  synth->add_option("--out", out_dir, "Dataset root to create")->required();
  synth->add_option("--positives", positives, "Images with a blob (class yes)");
  synth->add_option("--negatives", negatives, "Blank images (class no)");
  synth->add_option("--size", size, "Image side length in pixels");
  synth->add_option("--seed", synth_seed, "Random seed");

  std::vector<std::string> argv_storage{"lggnet"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  auto effective_config = [&]() {
    RunConfig c = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (seed) c.seed = *seed;
    if (!data_root.empty()) c.data_root = data_root;
    if (!out_dir.empty()) c.output = out_dir;
    if (k) c.train.k = *k;
    if (batch_size) c.train.batch_size = *batch_size;
    if (max_epochs) c.train.max_epochs = *max_epochs;
    if (threads) c.train.threads = *threads;
    if (retrain_full) c.train.retrain_full = true;
    if (!preset.empty()) c.preset = preset;
    c.train.seed = c.seed;
    validate(c);
    return c;
  };

  try {
    if (train->parsed()) return cmd_train(effective_config(), out, err);
    if (cv->parsed()) return cmd_cv(effective_config(), out, err);
    if (eval->parsed()) {
      std::optional<RunConfig> c;
      if (!config_path.empty()) c = load_run_config(config_path);
      return cmd_eval(checkpoint, c, data_root, out_dir, out, err);
    }
    if (predict_cmd->parsed()) return cmd_predict(checkpoint, images, out);
    if (inspect->parsed()) return cmd_inspect(paper_model, reduced_model, checkpoint, out);
    if (synth->parsed()) return cmd_synth(out_dir, positives, negatives, size, synth_seed, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DivergedError& e) {
    err << "training diverged: " << e.what() << '\n';
    return kDiverged;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << '\n';
    return kDataError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const ShapeError& e) {
    err << "configuration does not fit the architecture: " << e.what() << '\n';
    return kConfigError;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  }
  return kConfigError;
}

}  // namespace lggnet::cli
