// Copyright 2026 The srccount Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "srccount/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "srccount/checkpoint.hpp"
#include "srccount/datasets.hpp"
#include "srccount/evaluation.hpp"
#include "srccount/wav.hpp"

namespace srccount {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Reads known keys from one JSON object and rejects everything else.
class StrictObject {
 public:
  StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw Error(ErrorKind::kConfiguration, "config key '" + path_ + "' must be an object");
  }

  template <typename T>
  void Read(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorKind::kConfiguration, "config key '" + Qualified(key) + "' has the wrong type");
    }
  }

  template <typename T>
  void ReadOptional(const std::string& key, std::optional<T>& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if (j_.at(key).is_null()) {
      out.reset();
      return;
    }
    T v{};
    Read(key, v);
    out = v;
  }

  const json* Child(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string Qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void Finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) {
        throw Error(ErrorKind::kConfiguration, "unknown config key '" + Qualified(key) + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json ConfigJson(const RunConfig& c) {
  json blocks = json::array();
  for (const auto& b : c.model.classifier.conv_blocks) {
    blocks.push_back({{"out_channels", b.out_channels},
                      {"kernel_h", b.kernel_h},
                      {"kernel_w", b.kernel_w},
                      {"stride", b.stride}});
  }
  const auto& t = c.train;
  return {
      {"manifest", c.manifest},
      {"window", {{"window_ms", c.model.window.window_ms}, {"sample_rate_hz", c.model.window.sample_rate_hz}}},
      {"frontend",
       {{"n_filters", c.model.n_filters},
        {"kernel_width", c.model.kernel_width},
        {"f_min_hz", c.model.f_min_hz},
        {"f_max_hz", c.model.f_max_hz},
        {"pool_stride", c.model.pool_stride},
        {"pool_kernel_width", c.model.pool_kernel_width},
        {"pool_sigma", c.model.pool_sigma}}},
      {"classifier", {{"conv_blocks", blocks}, {"hidden_dim", c.model.classifier.hidden_dim}}},
      {"train",
       {{"epochs", t.epochs},
        {"batch_size", t.batch_size},
        {"learning_rate", t.learning_rate},
        {"beta1", t.beta1},
        {"beta2", t.beta2},
        {"adam_eps", t.adam_eps},
        {"frontend_lr_scale", t.frontend_lr_scale},
        {"seed", t.seed},
        {"patience", t.patience ? json(*t.patience) : json(nullptr)},
        {"max_steps", t.max_steps ? json(*t.max_steps) : json(nullptr)},
        {"threads", t.threads},
        {"max_train_chunks", c.max_train_chunks},
        {"max_val_chunks", c.max_val_chunks},
        {"balanced", c.balanced}}},
  };
}

RunConfig ParseConfigJson(const json& j) {
  RunConfig c;
  StrictObject root(j, "");
  root.Read("manifest", c.manifest);
  if (const json* w = root.Child("window")) {
    StrictObject o(*w, "window");
    o.Read("window_ms", c.model.window.window_ms);
    o.Read("sample_rate_hz", c.model.window.sample_rate_hz);
    o.Finish();
  }
  if (const json* f = root.Child("frontend")) {
    StrictObject o(*f, "frontend");
    o.Read("n_filters", c.model.n_filters);
    o.Read("kernel_width", c.model.kernel_width);
    o.Read("f_min_hz", c.model.f_min_hz);
    o.Read("f_max_hz", c.model.f_max_hz);
    o.Read("pool_stride", c.model.pool_stride);
    o.Read("pool_kernel_width", c.model.pool_kernel_width);
    o.Read("pool_sigma", c.model.pool_sigma);
    o.Finish();
  }
  if (const json* cl = root.Child("classifier")) {
    StrictObject o(*cl, "classifier");
    if (const json* blocks = o.Child("conv_blocks")) {
      if (!blocks->is_array()) {
        throw Error(ErrorKind::kConfiguration, "config key 'classifier.conv_blocks' must be an array");
      }
      c.model.classifier.conv_blocks.clear();
      for (std::size_t k = 0; k < blocks->size(); ++k) {
        StrictObject b((*blocks)[k], "classifier.conv_blocks[" + std::to_string(k) + "]");
        ConvBlockConfig block;
        b.Read("out_channels", block.out_channels);
        b.Read("kernel_h", block.kernel_h);
        b.Read("kernel_w", block.kernel_w);
        b.Read("stride", block.stride);
        b.Finish();
        c.model.classifier.conv_blocks.push_back(block);
      }
    }
    o.Read("hidden_dim", c.model.classifier.hidden_dim);
    o.Finish();
  }
  if (const json* t = root.Child("train")) {
    StrictObject o(*t, "train");
    o.Read("epochs", c.train.epochs);
    o.Read("batch_size", c.train.batch_size);
    o.Read("learning_rate", c.train.learning_rate);
    o.Read("beta1", c.train.beta1);
    o.Read("beta2", c.train.beta2);
    o.Read("adam_eps", c.train.adam_eps);
    o.Read("frontend_lr_scale", c.train.frontend_lr_scale);
    o.Read("seed", c.train.seed);
    o.ReadOptional("patience", c.train.patience);
    o.ReadOptional("max_steps", c.train.max_steps);
    o.Read("threads", c.train.threads);
    o.Read("max_train_chunks", c.max_train_chunks);
    o.Read("max_val_chunks", c.max_val_chunks);
    o.Read("balanced", c.balanced);
    o.Finish();
  }
  root.Finish();
  c.train.validate();
  return c;
}

json ParseJsonText(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, "malformed " + std::string(what) + ": " + e.what());
  }
}

std::string ReadText(const fs::path& path, std::string_view what) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kNotFound, std::string(what) + " not found: " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "failed writing " + path.string());
}

// Base document, then --set overrides, then strict parsing.
RunConfig ResolveConfig(const std::string& config_path, const std::vector<std::string>& sets) {
  std::string text = config_path.empty() ? ConfigJson(RunConfig{}).dump()
                                         : ReadText(config_path, "config file");
  for (const auto& s : sets) text = ApplyOverride(text, s);
  return ParseRunConfig(text);
}

void AddConfigOptions(CLI::App* cmd, std::string& config_path, std::vector<std::string>& sets) {
  cmd->add_option("--config", config_path, "JSON run configuration (strict keys)");
  cmd->add_option("--set", sets, "Override a config field, e.g. train.epochs=5 (repeatable)");
}

std::vector<LabeledChunk> Draw(const ChunkSet& set, std::size_t cap, bool balanced, std::size_t n_classes,
                               std::uint64_t seed) {
  if (cap == 0) return set.chunks;
  return balanced ? BalancedSample(set.chunks, cap, n_classes, seed) : RandomSubsample(set.chunks, cap, seed);
}

std::string Histogram(const std::vector<std::size_t>& counts) {
  std::ostringstream s;
  for (std::size_t k = 0; k < counts.size(); ++k) s << (k ? " " : "") << k << ':' << counts[k];
  return s.str();
}

// --- subcommands ----------------------------------------------------------

struct SynthArgs {
  std::string out;
  std::size_t n = 22;
  int min_count = 0;
  int max_count = 10;
  double duration_s = 5.0;
  std::uint64_t seed = 0;
  int sample_rate = kDefaultSampleRateHz;
  double window_ms = 25.0;
};

int CmdSynth(const SynthArgs& a) {
  SynthOptions o;
  o.n_mixtures = a.n;
  o.min_count = a.min_count;
  o.max_count = a.max_count;
  o.duration_s = a.duration_s;
  o.seed = a.seed;
  o.sample_rate_hz = a.sample_rate;
  o.window_ms = a.window_ms;
  const auto m = SynthGenerate(o, a.out);
  std::vector<std::size_t> hist(static_cast<std::size_t>(a.max_count + 1), 0);
  for (const auto& r : m.records) ++hist[static_cast<std::size_t>(r.count)];
  std::cout << "manifest " << (fs::path(a.out) / "manifest.json").string() << "\n";
  std::cout << "files per count " << Histogram(hist) << "\n";
  return 0;
}

struct IngestArgs {
  std::string dir;
  std::string mode = "activity";
  std::string out;
  int max_count = 10;
  std::uint64_t seed = 0;
  int sample_rate = kDefaultSampleRateHz;
  double window_ms = 25.0;
};

int CmdIngest(const IngestArgs& a) {
  IngestOptions o;
  if (a.mode == "activity") {
    o.mode = LabelMode::kActivity;
  } else if (a.mode == "count-only") {
    o.mode = LabelMode::kCountOnly;
  } else {
    throw Error(ErrorKind::kConfiguration, "unknown annotation mode '" + a.mode + "'");
  }
  o.max_count = a.max_count;
  o.seed = a.seed;
  o.sample_rate_hz = a.sample_rate;
  o.window_ms = a.window_ms;
  const auto result = IngestWavDir(a.dir, o);
  for (const auto& e : result.errors) std::cerr << "rejected: " << e << "\n";
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  const fs::path out = a.out.empty() ? fs::path(a.dir) / "manifest.json" : fs::path(a.out);
  SaveManifest(result.manifest, out);
  std::cout << "manifest " << out.string() << "\n";
  std::cout << "accepted " << result.manifest.records.size() << " rejected " << result.errors.size()
            << "\n";
  return 0;
}

struct TrainArgs {
  std::string manifest, config, out, history;
  std::vector<std::string> sets;
  std::optional<std::size_t> epochs, batch_size, max_steps, patience, threads, max_train, max_val;
  std::optional<double> lr, window_ms;
  std::optional<std::uint64_t> seed;
};

int CmdTrain(const TrainArgs& a) {
  RunConfig c = ResolveConfig(a.config, a.sets);
  if (!a.manifest.empty()) c.manifest = a.manifest;
  if (a.epochs) c.train.epochs = *a.epochs;
  if (a.batch_size) c.train.batch_size = *a.batch_size;
  if (a.max_steps) c.train.max_steps = *a.max_steps;
  if (a.patience) c.train.patience = *a.patience;
  if (a.threads) c.train.threads = *a.threads;
  if (a.max_train) c.max_train_chunks = *a.max_train;
  if (a.max_val) c.max_val_chunks = *a.max_val;
  if (a.lr) c.train.learning_rate = *a.lr;
  if (a.window_ms) c.model.window.window_ms = *a.window_ms;
  if (a.seed) c.train.seed = *a.seed;
  c.train.validate();
  if (c.manifest.empty()) throw Error(ErrorKind::kConfiguration, "no manifest given (--manifest)");

  const auto manifest = LoadManifest(c.manifest);
  c.model.classifier.n_classes = static_cast<std::size_t>(manifest.max_count + 1);
  const auto data = ChunkDataset(manifest, c.model.window);
  const std::size_t n_classes = c.model.classifier.n_classes;
  const auto train = Draw(data.train, c.max_train_chunks, c.balanced, n_classes, c.train.seed);
  const auto val = Draw(data.val, c.max_val_chunks, c.balanced, n_classes, c.train.seed + 1);
  spdlog::info("train chunks {} [{}], val chunks {} [{}]", train.size(),
               Histogram(data.train.class_counts), val.size(), Histogram(data.val.class_counts));

  std::ofstream history;
  if (!a.history.empty()) {
    history.open(a.history);
    if (!history) throw Error(ErrorKind::kIo, "cannot write history " + a.history);
  }
  auto model = BuildModel<float>(c.model, c.train.seed);
  const auto result = TrainLoop(train, val, std::move(model), c.train, [&](const EpochRecord& r) {
    const std::string line = ToJsonLine(r);
    std::cout << line << "\n" << std::flush;
    if (history) history << line << "\n" << std::flush;
  });
  SaveCheckpoint(result.best, a.out);
  std::cout << "checkpoint " << a.out << " best_val_accuracy " << result.best_val_accuracy << "\n";
  return 0;
}

struct EvalArgs {
  std::string manifest, ckpt, split = "test", report, confusion;
  std::size_t max_chunks = 0;
  std::size_t threads = 0;
  std::uint64_t seed = 0;
};

int CmdEval(const EvalArgs& a) {
  const Split split = ParseSplit(a.split);
  const auto model = LoadCheckpoint(a.ckpt);
  const auto manifest = LoadManifest(a.manifest);
  if (model.n_classes() != static_cast<std::size_t>(manifest.max_count + 1)) {
    throw Error(ErrorKind::kConfiguration,
                "checkpoint counts up to " + std::to_string(model.n_classes() - 1) +
                    " but manifest max_count is " + std::to_string(manifest.max_count));
  }
  const auto data = ChunkDataset(manifest, model.window);
  const auto chunks = Draw(data.split(split), a.max_chunks, true, model.n_classes(), a.seed);
  const auto report = Evaluate(model, chunks, a.threads);
  std::cout << ReportToText(report);
  if (!a.report.empty()) WriteText(a.report, ReportToJson(report) + "\n");
  if (!a.confusion.empty()) WriteText(a.confusion, ConfusionToCsv(report.confusion));
  return 0;
}

struct SweepArgs {
  std::string manifest, config, out, sizes = "10,15,20,25,30,35,40";
  std::vector<std::string> sets;
  std::size_t budget_steps = 200;
  std::size_t max_train = 2000, max_eval = 500;
  std::uint64_t seed = 0;
};

int CmdSweep(const SweepArgs& a) {
  SweepOptions o;
  o.sizes_ms = ParseSizeList(a.sizes);
  RunConfig c = ResolveConfig(a.config, a.sets);
  const std::string manifest_path = a.manifest.empty() ? c.manifest : a.manifest;
  if (manifest_path.empty()) throw Error(ErrorKind::kConfiguration, "no manifest given (--manifest)");
  const auto manifest = LoadManifest(manifest_path);
  c.model.classifier.n_classes = static_cast<std::size_t>(manifest.max_count + 1);
  o.model = c.model;
  o.train = c.train;
  o.train.max_steps = a.budget_steps;
  o.train.epochs = std::max<std::size_t>(o.train.epochs, a.budget_steps);
  o.train.patience.reset();
  o.max_train_chunks = a.max_train;
  o.max_eval_chunks = a.max_eval;
  o.seed = a.seed;
  const auto rows = MaeWindowSweep(manifest, o);
  const std::string csv = SweepToCsv(rows);
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    WriteText(a.out, csv);
    std::cout << "sweep " << a.out << " rows " << rows.size() << "\n";
  }
  for (const auto& r : rows) {
    if (!r.error.empty()) std::cerr << "row " << r.window_ms << " ms: " << r.error << "\n";
  }
  std::cout << kSweepReferenceNote << "\n";
  return 0;
}

struct GradCheckArgs {
  std::uint64_t seed = 0;
  bool full = false;
  std::string corrupt;
};

int CmdGradCheck(const GradCheckArgs& a) {
  const auto c = MakeGradCheckCase(a.seed);
  GradCheckOptions o;
  o.seed = a.seed;
  o.per_tensor = a.full ? 0 : o.per_tensor;
  o.corrupt_tensor = a.corrupt;
  const auto report = GradCheck(c.model, c.chunk, c.label, o);
  std::cout << report.ToTable();
  if (!report.all_pass()) {
    std::string failed;
    for (const auto& t : report.tensors) {
      if (t.status == CheckStatus::kFail) failed += (failed.empty() ? "" : ",") + t.name;
    }
    throw Error(ErrorKind::kNumeric, "gradient check failed for " + failed);
  }
  return 0;
}

struct CountArgs {
  std::string wav, ckpt;
  std::size_t smooth = 1;
};

int CmdCount(const CountArgs& a) {
  if (a.smooth == 0) throw Error(ErrorKind::kConfiguration, "--smooth must be at least 1");
  const auto model = LoadCheckpoint(a.ckpt);
  const auto wave = ReadWav(a.wav);
  if (wave.sample_rate_hz != model.window.sample_rate_hz) {
    throw Error(ErrorKind::kConfiguration,
                "WAV sample rate " + std::to_string(wave.sample_rate_hz) +
                    " Hz does not match the checkpoint (" +
                    std::to_string(model.window.sample_rate_hz) + " Hz)");
  }
  const std::size_t len = model.chunk_length();
  const std::size_t n_chunks = wave.size() / len;
  const auto start = std::chrono::steady_clock::now();
  std::vector<int> recent;
  std::vector<float> chunk(len);
  std::string out;
  char line[64];
  for (std::size_t k = 0; k < n_chunks; ++k) {
    for (std::size_t n = 0; n < len; ++n) chunk[n] = static_cast<float>(wave.samples[k * len + n]);
    recent.push_back(Predict<float>(PredictProbs(model, std::span<const float>(chunk))));
    if (recent.size() > a.smooth) recent.erase(recent.begin());
    std::vector<int> sorted = recent;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>((sorted.size() - 1) / 2),
                     sorted.end());
    const int count = sorted[(sorted.size() - 1) / 2];
    const double t_ms = 1000.0 * static_cast<double>(k * len) / wave.sample_rate_hz;
    std::snprintf(line, sizeof(line), "%g,%d\n", t_ms, count);
    std::fputs(line, stdout);
  }
  std::fflush(stdout);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double audio_s = static_cast<double>(n_chunks * len) / wave.sample_rate_hz;
  std::fprintf(stderr, "throughput %.2fx real time (%zu chunks, %.3f s audio in %.3f s)\n",
               wall > 0 ? audio_s / wall : 0.0, n_chunks, audio_s, wall);
  return 0;
}

void ConfigureLogging() {
  auto logger = spdlog::get("srccount");
  if (!logger) logger = spdlog::stderr_color_mt("srccount");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  spdlog::cfg::load_env_levels();
}

}  // namespace

RunConfig ParseRunConfig(std::string_view json_text) {
  return ParseConfigJson(ParseJsonText(json_text, "config"));
}

RunConfig LoadRunConfig(const fs::path& path) { return ParseRunConfig(ReadText(path, "config file")); }

std::string RunConfigToJson(const RunConfig& config) { return ConfigJson(config).dump(2); }

std::string ApplyOverride(std::string_view json_text, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error(ErrorKind::kParse, "override '" + std::string(assignment) + "' is not key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json doc = ParseJsonText(json_text, "config");
  json* node = &doc;
  std::size_t pos = 0;
  while (true) {
    const auto dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (part.empty() || !node->is_object()) {
      throw Error(ErrorKind::kConfiguration, "invalid override key '" + key + "'");
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    pos = dot + 1;
  }
  return doc.dump();
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfiguration:
    case ErrorKind::kParameter:
    case ErrorKind::kParse:
      return 2;
    case ErrorKind::kNotFound:
    case ErrorKind::kIo:
      return 3;
    case ErrorKind::kValidation:
    case ErrorKind::kDomain:
    case ErrorKind::kBadMagic:
    case ErrorKind::kVersionMismatch:
    case ErrorKind::kTruncatedPayload:
    case ErrorKind::kShapeMismatch:
      return 4;
    case ErrorKind::kNumeric:
    case ErrorKind::kEmptyResult:
      return 1;
  }
  return 1;
}

std::string FormatErrorLine(std::string_view kind, std::string_view message) {
  std::string line = "error: " + std::string(kind) + ": " + std::string(message);
  std::replace(line.begin(), line.end(), '\n', ' ');
  return line;
}

int RunCli(int argc, char** argv) {
  CLI::App app{"Audio source counting: learnable Gabor/PCEN frontend with a compact CNN"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic mixtures and a manifest");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--n", synth.n, "Number of mixtures");
  synth_cmd->add_option("--min-count", synth.min_count, "Smallest source count");
  synth_cmd->add_option("--max-count", synth.max_count, "Largest source count (zeta)");
  synth_cmd->add_option("--duration-s", synth.duration_s, "Mixture duration in seconds");
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--sample-rate", synth.sample_rate, "Sample rate in Hz");
  synth_cmd->add_option("--window-ms", synth.window_ms, "Window length recorded in the manifest");

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Build a manifest from a directory of WAV files");
  ingest_cmd->add_option("--dir", ingest.dir, "Directory of 16-bit mono PCM WAV files")->required();
  ingest_cmd->add_option("--mode", ingest.mode, "activity (JSON sidecars) or count-only (file name)")
      ->check(CLI::IsMember({"activity", "count-only"}));
  ingest_cmd->add_option("--out", ingest.out, "Manifest path (default <dir>/manifest.json)");
  ingest_cmd->add_option("--max-count", ingest.max_count, "Largest source count (zeta)");
  ingest_cmd->add_option("--seed", ingest.seed, "Split assignment seed");
  ingest_cmd->add_option("--sample-rate", ingest.sample_rate, "Required sample rate in Hz");
  ingest_cmd->add_option("--window-ms", ingest.window_ms, "Window length recorded in the manifest");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a model on a manifest");
  train_cmd->add_option("--manifest", train.manifest, "Dataset manifest");
  AddConfigOptions(train_cmd, train.config, train.sets);
  train_cmd->add_option("--out", train.out, "Checkpoint path")->required();
  train_cmd->add_option("--history", train.history, "Write per-epoch JSON lines here");
  train_cmd->add_option("--epochs", train.epochs, "Epoch limit");
  train_cmd->add_option("--batch-size", train.batch_size, "Mini-batch size");
  train_cmd->add_option("--lr", train.lr, "Adam learning rate");
  train_cmd->add_option("--seed", train.seed, "Initialization and shuffling seed");
  train_cmd->add_option("--patience", train.patience, "Early-stopping patience in epochs");
  train_cmd->add_option("--max-steps", train.max_steps, "Optimizer step budget");
  train_cmd->add_option("--threads", train.threads, "Worker threads (0 = all cores)");
  train_cmd->add_option("--window-ms", train.window_ms, "Chunk length in milliseconds");
  train_cmd->add_option("--max-train-chunks", train.max_train, "Cap on training chunks (0 = all)");
  train_cmd->add_option("--max-val-chunks", train.max_val, "Cap on validation chunks (0 = all)");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on one split");
  eval_cmd->add_option("--manifest", eval.manifest, "Dataset manifest")->required();
  eval_cmd->add_option("--ckpt", eval.ckpt, "Checkpoint")->required();
  eval_cmd->add_option("--split", eval.split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));
  eval_cmd->add_option("--report", eval.report, "Write the JSON report here");
  eval_cmd->add_option("--confusion", eval.confusion, "Write the confusion matrix as CSV here");
  eval_cmd->add_option("--max-chunks", eval.max_chunks, "Class-balanced cap on chunks (0 = all)");
  eval_cmd->add_option("--seed", eval.seed, "Sampling seed for --max-chunks");
  eval_cmd->add_option("--threads", eval.threads, "Worker threads (0 = all cores)");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Window-size sweep scored by test MAE");
  sweep_cmd->add_option("--manifest", sweep.manifest, "Dataset manifest");
  AddConfigOptions(sweep_cmd, sweep.config, sweep.sets);
  sweep_cmd->add_option("--sizes", sweep.sizes, "Comma-separated window sizes in ms");
  sweep_cmd->add_option("--budget-steps", sweep.budget_steps, "Optimizer steps per size");
  sweep_cmd->add_option("--out", sweep.out, "CSV path (default stdout)");
  sweep_cmd->add_option("--max-train-chunks", sweep.max_train, "Training chunks per size (0 = all)");
  sweep_cmd->add_option("--max-eval-chunks", sweep.max_eval, "Validation/test chunks per size (0 = all)");
  sweep_cmd->add_option("--seed", sweep.seed, "Seed");

  GradCheckArgs grad;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  grad_cmd->add_option("--seed", grad.seed, "Model and input seed");
  grad_cmd->add_flag("--full", grad.full, "Check every scalar instead of a sample");
  grad_cmd->add_option("--corrupt", grad.corrupt, "Perturb one tensor's analytic gradient")->group("");

  CountArgs count;
  auto* count_cmd = app.add_subcommand("count", "Stream a WAV file and print per-chunk counts");
  count_cmd->add_option("--wav", count.wav, "16-bit mono PCM WAV")->required();
  count_cmd->add_option("--ckpt", count.ckpt, "Checkpoint")->required();
  count_cmd->add_option("--smooth", count.smooth, "Running median over the last K chunks");

  auto* config_cmd = app.add_subcommand("config", "Print the default run configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << FormatErrorLine("usage", e.what()) << "\n";
    return 2;
  }

  try {
    ConfigureLogging();
    if (synth_cmd->parsed()) return CmdSynth(synth);
    if (ingest_cmd->parsed()) return CmdIngest(ingest);
    if (train_cmd->parsed()) return CmdTrain(train);
    if (eval_cmd->parsed()) return CmdEval(eval);
    if (sweep_cmd->parsed()) return CmdSweep(sweep);
    if (grad_cmd->parsed()) return CmdGradCheck(grad);
    if (count_cmd->parsed()) return CmdCount(count);
    if (config_cmd->parsed()) {
      std::cout << RunConfigToJson(RunConfig{}) << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << FormatErrorLine(ToString(e.kind()), e.what()) << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::cerr << FormatErrorLine("internal", e.what()) << "\n";
    return 1;
  }
  return 1;
}

}  // namespace srccount
