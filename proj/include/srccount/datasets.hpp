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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "srccount/signal.hpp"

namespace srccount {

// Amplitude-modulated harmonic complexes standing in for voices.
struct SyntheticSourceConfig {
  double f0_min_hz = 90.0;
  double f0_max_hz = 300.0;
  int n_harmonics = 8;          // amplitude of harmonic k is 1/k
  double am_rate_min_hz = 2.0;  // syllabic-rate modulation
  double am_rate_max_hz = 8.0;
  double am_depth = 0.5;
  double duty_min = 0.5;
  double duty_max = 0.9;
  int intervals_min = 1;
  int intervals_max = 4;
  double gain_jitter_min = 0.6;  // per-source gain drawn from [jitter_min, 1] x base
  double noise_amplitude = 0.004;  // uniform noise floor present in every mixture
  double peak = 0.99;

  void validate(int sample_rate_hz) const;
};

enum class Split { kTrain, kVal, kTest };
std::string_view ToString(Split split);
Split ParseSplit(std::string_view text);

enum class LabelMode {
  kActivity,   // per-source activity intervals are known
  kCountOnly,  // one count per file, applied to every chunk
};

struct SourceRecord {
  std::string id;
  ActivityMask mask;
};

struct MixtureRecord {
  std::string audio_path;  // relative to the manifest directory, or absolute
  int sample_rate_hz = kDefaultSampleRateHz;
  std::size_t duration_samples = 0;
  std::vector<SourceRecord> sources;
  int max_count = 0;
  LabelMode label_mode = LabelMode::kActivity;
  int count = 0;  // number of sources (activity mode) or the file label (count-only)
  Split split = Split::kTrain;
};

struct DatasetManifest {
  int format_version = 1;
  WindowConfig window;
  int max_count = 0;
  std::vector<MixtureRecord> records;
  std::string notes;
  // Directory relative paths resolve against; not serialized.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const MixtureRecord& record) const;
  // Throws kValidation on masks outside the duration or counts above max_count.
  void validate() const;
};

inline constexpr int kManifestVersion = 1;

void SaveManifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest LoadManifest(const std::filesystem::path& path);
std::string ManifestToJson(const DatasetManifest& manifest);

// Deterministic per-file split: within each count class, files cycle through
// an 8/1/1 train/val/test pattern that continues across classes.
void AssignSplits(std::vector<MixtureRecord>& records, std::uint64_t seed);

struct SynthOptions {
  std::size_t n_mixtures = 22;
  int min_count = 0;
  int max_count = 10;
  double duration_s = 5.0;
  std::uint64_t seed = 0;
  int sample_rate_hz = kDefaultSampleRateHz;
  double window_ms = 25.0;
  SyntheticSourceConfig source;
};

struct SynthMixture {
  Waveform audio;
  std::vector<ActivityMask> masks;
};

// One mixture with `count` sources, fully determined by (options, index).
SynthMixture SynthesizeMixture(const SynthOptions& options, int count, std::size_t index);

// Writes class-balanced mixtures as WAV files plus manifest.json into out_dir.
DatasetManifest SynthGenerate(const SynthOptions& options, const std::filesystem::path& out_dir);

struct IngestOptions {
  LabelMode mode = LabelMode::kActivity;
  int sample_rate_hz = kDefaultSampleRateHz;
  int max_count = 10;
  double window_ms = 25.0;
  std::uint64_t seed = 0;
};

struct IngestResult {
  DatasetManifest manifest;
  std::vector<std::string> errors;  // one line per rejected file
  std::vector<std::string> warnings;
};

// Activity mode reads a <stem>.json sidecar next to each WAV with
// {"sample_rate", "duration_samples", "sources": [[[start, end], ...], ...]};
// count-only mode takes the label from the leading integer of the file stem.
IngestResult IngestWavDir(const std::filesystem::path& dir, const IngestOptions& options);

struct ChunkSet {
  std::vector<LabeledChunk> chunks;
  std::vector<std::size_t> class_counts;
};

struct ChunkedDataset {
  ChunkSet train, val, test;

  const ChunkSet& split(Split s) const;
};

ChunkedDataset ChunkDataset(const DatasetManifest& manifest, const WindowConfig& cfg);

// Chunks of one record; count-only records carry the file label on every chunk.
std::vector<LabeledChunk> ChunkRecord(const DatasetManifest& manifest, const MixtureRecord& record,
                                      const WindowConfig& cfg);

// Class-balanced draw without replacement: total / n_classes chunks per label,
// or all of a label's chunks when it has fewer. Output is grouped by label.
std::vector<LabeledChunk> BalancedSample(std::span<const LabeledChunk> chunks, std::size_t total,
                                         std::size_t n_classes, std::uint64_t seed);

// Seeded draw of `cap` chunks without replacement, in original order. cap 0 keeps all.
std::vector<LabeledChunk> RandomSubsample(std::span<const LabeledChunk> chunks, std::size_t cap,
                                          std::uint64_t seed);

}  // namespace srccount
