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

#include "srccount/datasets.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "srccount/error.hpp"
#include "srccount/wav.hpp"

namespace srccount {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over (seed, index).
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + index + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Splits `total` into parts proportional to `weights` with cumulative rounding,
// so the parts always sum to `total`.
std::vector<std::size_t> Apportion(std::size_t total, const std::vector<double>& weights) {
  double sum = 0;
  for (double w : weights) sum += w;
  std::vector<std::size_t> parts(weights.size());
  double cum = 0;
  std::size_t prev = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    cum += weights[k];
    const std::size_t edge = k + 1 == weights.size()
                                 ? total
                                 : static_cast<std::size_t>(std::llround(total * (cum / sum)));
    parts[k] = edge - prev;
    prev = edge;
  }
  return parts;
}

ActivityMask RandomMask(std::mt19937_64& rng, std::size_t total, const SyntheticSourceConfig& cfg) {
  std::uniform_int_distribution<int> n_dist(cfg.intervals_min, cfg.intervals_max);
  std::uniform_real_distribution<double> duty_dist(cfg.duty_min, cfg.duty_max);
  std::uniform_real_distribution<double> act_w(0.2, 1.0);
  std::uniform_real_distribution<double> gap_w(0.0, 1.0);
  const auto n = static_cast<std::size_t>(n_dist(rng));
  const double duty = duty_dist(rng);
  std::size_t active = static_cast<std::size_t>(std::llround(duty * static_cast<double>(total)));
  active = std::clamp<std::size_t>(active, n, total);

  std::vector<double> aw(n), gw(n + 1);
  for (double& w : aw) w = act_w(rng);
  for (double& w : gw) w = gap_w(rng);
  auto act = Apportion(active - n, aw);
  for (auto& a : act) ++a;
  const auto gaps = Apportion(total - active, gw);

  ActivityMask mask;
  std::size_t pos = gaps[0];
  for (std::size_t k = 0; k < n; ++k) {
    mask.intervals.emplace_back(pos, pos + act[k]);
    pos += act[k] + gaps[k + 1];
  }
  return mask;
}

std::string_view ToString(LabelMode mode) {
  return mode == LabelMode::kActivity ? "activity" : "count_only";
}

LabelMode ParseLabelMode(std::string_view text) {
  if (text == "activity") return LabelMode::kActivity;
  if (text == "count_only") return LabelMode::kCountOnly;
  throw Error(ErrorKind::kParse, "unknown label mode '" + std::string(text) + "'");
}

json RecordJson(const MixtureRecord& r, const std::string& audio) {
  json sources = json::array();
  for (const auto& s : r.sources) {
    json iv = json::array();
    for (const auto& [a, b] : s.mask.intervals) iv.push_back({a, b});
    sources.push_back({{"id", s.id}, {"intervals", iv}});
  }
  return {{"audio", audio},
          {"sample_rate_hz", r.sample_rate_hz},
          {"duration_samples", r.duration_samples},
          {"max_count", r.max_count},
          {"label_mode", ToString(r.label_mode)},
          {"count", r.count},
          {"split", ToString(r.split)},
          {"sources", sources}};
}

json ManifestJson(const DatasetManifest& m, const fs::path* relative_to) {
  json records = json::array();
  for (const auto& r : m.records) {
    std::string audio = r.audio_path;
    if (relative_to) {
      const fs::path abs = fs::absolute(m.resolve(r)).lexically_normal();
      const fs::path rel = abs.lexically_relative(*relative_to);
      audio = rel.empty() ? abs.string() : rel.generic_string();
    }
    records.push_back(RecordJson(r, audio));
  }
  return {{"format_version", m.format_version},
          {"window", {{"window_ms", m.window.window_ms}, {"sample_rate_hz", m.window.sample_rate_hz}}},
          {"max_count", m.max_count},
          {"notes", m.notes},
          {"records", records}};
}

std::vector<float> Slice(const Waveform& w, const WindowBounds& b) {
  return {w.samples.begin() + static_cast<std::ptrdiff_t>(b.begin),
          w.samples.begin() + static_cast<std::ptrdiff_t>(b.end)};
}

}  // namespace

void SyntheticSourceConfig::validate(int sample_rate_hz) const {
  if (!(f0_min_hz > 0.0 && f0_min_hz <= f0_max_hz) || n_harmonics < 1) {
    throw Error(ErrorKind::kConfiguration, "invalid fundamental range or harmonic count");
  }
  if (f0_max_hz * n_harmonics >= sample_rate_hz / 2.0) {
    throw Error(ErrorKind::kConfiguration,
                "fundamental must stay below Nyquist / n_harmonics (" +
                    std::to_string(sample_rate_hz / 2.0 / n_harmonics) + " Hz)");
  }
  if (!(duty_min > 0.0 && duty_min <= duty_max && duty_max <= 1.0) || intervals_min < 1 ||
      intervals_min > intervals_max || !(am_depth >= 0.0 && am_depth <= 1.0) ||
      !(gain_jitter_min > 0.0 && gain_jitter_min <= 1.0) || !(noise_amplitude >= 0.0) ||
      !(peak > noise_amplitude && peak <= 1.0)) {
    throw Error(ErrorKind::kConfiguration, "invalid synthetic source configuration");
  }
}

std::string_view ToString(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split ParseSplit(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  if (text == "test") return Split::kTest;
  throw Error(ErrorKind::kParse, "unknown split '" + std::string(text) + "'");
}

fs::path DatasetManifest::resolve(const MixtureRecord& record) const {
  const fs::path p(record.audio_path);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

void DatasetManifest::validate() const {
  for (const auto& r : records) {
    if (r.count < 0 || r.count > max_count || r.max_count > max_count) {
      throw Error(ErrorKind::kValidation, r.audio_path + ": count " + std::to_string(r.count) +
                                              " exceeds max_count " + std::to_string(max_count));
    }
    if (r.label_mode == LabelMode::kActivity &&
        r.sources.size() != static_cast<std::size_t>(r.count)) {
      throw Error(ErrorKind::kValidation, r.audio_path + ": source list does not match count");
    }
    for (const auto& s : r.sources) ValidateMask(s.mask, r.duration_samples);
  }
}

std::string ManifestToJson(const DatasetManifest& manifest) {
  return ManifestJson(manifest, nullptr).dump(1);
}

void SaveManifest(const DatasetManifest& manifest, const fs::path& path) {
  const fs::path dir = fs::absolute(path).parent_path().lexically_normal();
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write manifest " + path.string());
  out << ManifestJson(manifest, &dir).dump(1) << "\n";
  if (!out) throw Error(ErrorKind::kIo, "failed writing manifest " + path.string());
}

DatasetManifest LoadManifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kNotFound, "manifest not found: " + path.string());
  DatasetManifest m;
  try {
    const json j = json::parse(in);
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kManifestVersion) {
      throw Error(ErrorKind::kVersionMismatch,
                  "manifest version " + std::to_string(m.format_version) + " is not supported");
    }
    m.window.window_ms = j.at("window").at("window_ms").get<double>();
    m.window.sample_rate_hz = j.at("window").at("sample_rate_hz").get<int>();
    m.max_count = j.at("max_count").get<int>();
    m.notes = j.value("notes", "");
    for (const auto& rj : j.at("records")) {
      MixtureRecord r;
      r.audio_path = rj.at("audio").get<std::string>();
      r.sample_rate_hz = rj.at("sample_rate_hz").get<int>();
      r.duration_samples = rj.at("duration_samples").get<std::size_t>();
      r.max_count = rj.at("max_count").get<int>();
      r.label_mode = ParseLabelMode(rj.at("label_mode").get<std::string>());
      r.count = rj.at("count").get<int>();
      r.split = ParseSplit(rj.at("split").get<std::string>());
      for (const auto& sj : rj.at("sources")) {
        SourceRecord s;
        s.id = sj.at("id").get<std::string>();
        for (const auto& iv : sj.at("intervals")) {
          s.mask.intervals.emplace_back(iv.at(0).get<std::size_t>(), iv.at(1).get<std::size_t>());
        }
        r.sources.push_back(std::move(s));
      }
      m.records.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, "malformed manifest " + path.string() + ": " + e.what());
  }
  m.base_dir = fs::absolute(path).parent_path();
  m.validate();
  return m;
}

void AssignSplits(std::vector<MixtureRecord>& records, std::uint64_t seed) {
  static constexpr Split kPattern[10] = {Split::kTrain, Split::kTrain, Split::kTrain, Split::kTrain,
                                         Split::kTrain, Split::kTrain, Split::kTrain, Split::kTrain,
                                         Split::kVal,   Split::kTest};
  std::map<int, std::vector<std::size_t>> by_count;
  for (std::size_t k = 0; k < records.size(); ++k) by_count[records[k].count].push_back(k);
  std::mt19937_64 rng(MixSeed(seed, 0xC0FFEE));
  std::size_t position = 0;
  for (auto& [count, idx] : by_count) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t k : idx) records[k].split = kPattern[position++ % 10];
  }
}

SynthMixture SynthesizeMixture(const SynthOptions& options, int count, std::size_t index) {
  const auto& cfg = options.source;
  const int rate = options.sample_rate_hz;
  const auto total = static_cast<std::size_t>(std::llround(options.duration_s * rate));
  std::mt19937_64 rng(MixSeed(options.seed, index));

  SynthMixture mix;
  mix.audio.sample_rate_hz = rate;
  mix.audio.samples.resize(total);
  std::uniform_real_distribution<double> noise(-cfg.noise_amplitude, cfg.noise_amplitude);
  for (double& v : mix.audio.samples) v = noise(rng);

  double harmonic_sum = 0;
  for (int h = 1; h <= cfg.n_harmonics; ++h) harmonic_sum += 1.0 / h;
  // Worst case: every source at full gain, in phase, plus the noise floor.
  const double base_gain =
      (cfg.peak - cfg.noise_amplitude) / (std::max(options.max_count, 1) * harmonic_sum);

  const double two_pi = 2.0 * std::numbers::pi;
  std::uniform_real_distribution<double> f0_dist(cfg.f0_min_hz, cfg.f0_max_hz);
  std::uniform_real_distribution<double> am_dist(cfg.am_rate_min_hz, cfg.am_rate_max_hz);
  std::uniform_real_distribution<double> phase_dist(0.0, two_pi);
  std::uniform_real_distribution<double> gain_dist(cfg.gain_jitter_min, 1.0);
  for (int s = 0; s < count; ++s) {
    const double f0 = f0_dist(rng);
    const double am_rate = am_dist(rng);
    const double am_phase = phase_dist(rng);
    const double gain = base_gain * gain_dist(rng);
    std::vector<double> phases(static_cast<std::size_t>(cfg.n_harmonics));
    for (double& p : phases) p = phase_dist(rng);
    ActivityMask mask = RandomMask(rng, total, cfg);
    for (const auto& [begin, end] : mask.intervals) {
      for (std::size_t n = begin; n < end; ++n) {
        const double t = static_cast<double>(n) / rate;
        const double env = 1.0 - cfg.am_depth * 0.5 * (1.0 - std::cos(two_pi * am_rate * t + am_phase));
        double v = 0;
        for (int h = 1; h <= cfg.n_harmonics; ++h) {
          v += std::sin(two_pi * h * f0 * t + phases[static_cast<std::size_t>(h - 1)]) / h;
        }
        mix.audio.samples[n] += gain * env * v;
      }
    }
    mix.masks.push_back(std::move(mask));
  }
  return mix;
}

DatasetManifest SynthGenerate(const SynthOptions& options, const fs::path& out_dir) {
  if (options.n_mixtures == 0) throw Error(ErrorKind::kConfiguration, "nothing to generate");
  if (options.min_count < 0 || options.min_count > options.max_count) {
    throw Error(ErrorKind::kConfiguration, "count range must satisfy 0 <= min <= max");
  }
  options.source.validate(options.sample_rate_hz);
  WindowConfig window{options.window_ms, options.sample_rate_hz};
  const auto total = static_cast<std::size_t>(std::llround(options.duration_s * options.sample_rate_hz));
  if (total < window.length()) {
    throw Error(ErrorKind::kConfiguration, "duration is shorter than one window");
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw Error(ErrorKind::kIo, "cannot create output directory " + out_dir.string());
  }

  DatasetManifest m;
  m.window = window;
  m.max_count = options.max_count;
  m.base_dir = fs::absolute(out_dir);
  m.notes = "synthetic harmonic-complex mixtures; labels from exact activity masks";
  const int n_classes = options.max_count - options.min_count + 1;
  for (std::size_t k = 0; k < options.n_mixtures; ++k) {
    const int count = options.min_count + static_cast<int>(k % static_cast<std::size_t>(n_classes));
    auto mix = SynthesizeMixture(options, count, k);
    char name[32];
    std::snprintf(name, sizeof(name), "mix_%05zu.wav", k);
    WriteWav(out_dir / name, mix.audio);
    MixtureRecord r;
    r.audio_path = name;
    r.sample_rate_hz = options.sample_rate_hz;
    r.duration_samples = total;
    r.max_count = options.max_count;
    r.count = count;
    for (std::size_t s = 0; s < mix.masks.size(); ++s) {
      r.sources.push_back({"s" + std::to_string(s), std::move(mix.masks[s])});
    }
    m.records.push_back(std::move(r));
  }
  AssignSplits(m.records, options.seed);
  SaveManifest(m, out_dir / "manifest.json");
  return m;
}

IngestResult IngestWavDir(const fs::path& dir, const IngestOptions& options) {
  IngestResult result;
  auto& m = result.manifest;
  m.window = {options.window_ms, options.sample_rate_hz};
  m.max_count = options.max_count;
  m.base_dir = fs::absolute(dir);
  m.notes = options.mode == LabelMode::kCountOnly
                ? "count-only labels: every chunk carries the file's speaker count; "
                  "within-file silences are ignored"
                : "activity labels from sidecar annotations";
  if (!fs::is_directory(dir)) throw Error(ErrorKind::kNotFound, "not a directory: " + dir.string());

  std::vector<fs::path> wavs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".wav") wavs.push_back(entry.path());
  }
  std::sort(wavs.begin(), wavs.end());
  if (wavs.empty()) {
    result.warnings.push_back("no WAV files in " + dir.string());
    spdlog::warn("no WAV files in {}", dir.string());
  }

  for (const auto& path : wavs) {
    const std::string name = path.filename().string();
    try {
      const Waveform wave = ReadWav(path);
      if (wave.sample_rate_hz != options.sample_rate_hz) {
        throw Error(ErrorKind::kConfiguration,
                    "sample rate " + std::to_string(wave.sample_rate_hz) + " Hz, expected " +
                        std::to_string(options.sample_rate_hz) + " Hz (resampling unsupported)");
      }
      MixtureRecord r;
      r.audio_path = name;
      r.sample_rate_hz = wave.sample_rate_hz;
      r.duration_samples = wave.size();
      r.max_count = options.max_count;
      r.label_mode = options.mode;
      if (options.mode == LabelMode::kActivity) {
        fs::path sidecar = path;
        sidecar.replace_extension(".json");
        std::ifstream in(sidecar);
        if (!in) throw Error(ErrorKind::kNotFound, "missing annotation " + sidecar.filename().string());
        json j;
        try {
          j = json::parse(in);
        } catch (const json::exception& e) {
          throw Error(ErrorKind::kParse, "malformed annotation: " + std::string(e.what()));
        }
        if (j.at("sample_rate").get<int>() != wave.sample_rate_hz ||
            j.at("duration_samples").get<std::size_t>() != wave.size()) {
          throw Error(ErrorKind::kValidation, "annotation rate/duration disagree with the audio");
        }
        std::size_t s = 0;
        for (const auto& src : j.at("sources")) {
          SourceRecord rec;
          rec.id = "s" + std::to_string(s++);
          for (const auto& iv : src) {
            rec.mask.intervals.emplace_back(iv.at(0).get<std::size_t>(), iv.at(1).get<std::size_t>());
          }
          ValidateMask(rec.mask, wave.size());
          r.sources.push_back(std::move(rec));
        }
        r.count = static_cast<int>(r.sources.size());
      } else {
        const std::string stem = path.stem().string();
        std::size_t digits = 0;
        while (digits < stem.size() && std::isdigit(static_cast<unsigned char>(stem[digits]))) ++digits;
        if (digits == 0 || (digits < stem.size() && stem[digits] != '_' && stem[digits] != '-')) {
          throw Error(ErrorKind::kParse, "cannot read a count label from the file name");
        }
        r.count = std::stoi(stem.substr(0, digits));
      }
      if (r.count > options.max_count) {
        throw Error(ErrorKind::kValidation, "count " + std::to_string(r.count) +
                                                " exceeds max_count " +
                                                std::to_string(options.max_count));
      }
      m.records.push_back(std::move(r));
    } catch (const Error& e) {
      result.errors.push_back(name + ": " + e.what());
    } catch (const json::exception& e) {
      result.errors.push_back(name + ": malformed annotation: " + e.what());
    }
  }
  AssignSplits(m.records, options.seed);
  if (!result.errors.empty()) {
    spdlog::warn("ingest: {} of {} files rejected", result.errors.size(), wavs.size());
  }
  return result;
}

const ChunkSet& ChunkedDataset::split(Split s) const {
  switch (s) {
    case Split::kTrain: return train;
    case Split::kVal: return val;
    case Split::kTest: return test;
  }
  return train;
}

std::vector<LabeledChunk> ChunkRecord(const DatasetManifest& manifest, const MixtureRecord& record,
                                      const WindowConfig& cfg) {
  const Waveform wave = ReadWav(manifest.resolve(record));
  if (wave.sample_rate_hz != cfg.sample_rate_hz) {
    throw Error(ErrorKind::kConfiguration,
                record.audio_path + ": sample rate " + std::to_string(wave.sample_rate_hz) +
                    " Hz does not match the window configuration (" +
                    std::to_string(cfg.sample_rate_hz) + " Hz)");
  }
  if (wave.size() != record.duration_samples) {
    throw Error(ErrorKind::kValidation, record.audio_path + ": audio has " +
                                            std::to_string(wave.size()) + " samples, manifest says " +
                                            std::to_string(record.duration_samples));
  }
  if (record.label_mode == LabelMode::kActivity) {
    std::vector<ActivityMask> masks;
    for (const auto& s : record.sources) masks.push_back(s.mask);
    return SegmentAndLabel(wave, masks, cfg);
  }
  std::vector<LabeledChunk> chunks;
  for (const auto& w : MakeWindows(wave.size(), cfg)) chunks.push_back({Slice(wave, w), record.count});
  return chunks;
}

ChunkedDataset ChunkDataset(const DatasetManifest& manifest, const WindowConfig& cfg) {
  ChunkedDataset out;
  const auto classes = static_cast<std::size_t>(manifest.max_count + 1);
  for (ChunkSet* s : {&out.train, &out.val, &out.test}) s->class_counts.assign(classes, 0);
  for (const auto& r : manifest.records) {
    ChunkSet& set = r.split == Split::kTrain ? out.train : r.split == Split::kVal ? out.val : out.test;
    for (auto& c : ChunkRecord(manifest, r, cfg)) {
      ++set.class_counts[static_cast<std::size_t>(c.label)];
      set.chunks.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<LabeledChunk> BalancedSample(std::span<const LabeledChunk> chunks, std::size_t total,
                                         std::size_t n_classes, std::uint64_t seed) {
  if (n_classes == 0) throw Error(ErrorKind::kConfiguration, "zero classes");
  std::vector<std::vector<std::size_t>> by_label(n_classes);
  for (std::size_t k = 0; k < chunks.size(); ++k) {
    const int label = chunks[k].label;
    if (label < 0 || static_cast<std::size_t>(label) >= n_classes) {
      throw Error(ErrorKind::kValidation, "label " + std::to_string(label) + " out of range");
    }
    by_label[static_cast<std::size_t>(label)].push_back(k);
  }
  std::mt19937_64 rng(MixSeed(seed, 0xBA1A));
  const std::size_t per_class = total / n_classes;
  std::vector<LabeledChunk> out;
  for (auto& idx : by_label) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t j = 0; j < std::min(per_class, idx.size()); ++j) out.push_back(chunks[idx[j]]);
  }
  return out;
}

std::vector<LabeledChunk> RandomSubsample(std::span<const LabeledChunk> chunks, std::size_t cap,
                                          std::uint64_t seed) {
  if (cap == 0 || chunks.size() <= cap) return {chunks.begin(), chunks.end()};
  std::vector<std::size_t> idx(chunks.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(MixSeed(seed, 0x5AB5));
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  std::vector<LabeledChunk> out;
  out.reserve(cap);
  for (std::size_t k : idx) out.push_back(chunks[k]);
  return out;
}

}  // namespace srccount
