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
#include <span>
#include <utility>
#include <vector>

namespace srccount {

inline constexpr int kDefaultSampleRateHz = 16000;

struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = kDefaultSampleRateHz;

  std::size_t size() const { return samples.size(); }
};

// Half-open [start, end) sample ranges during which one source is active.
struct ActivityMask {
  std::vector<std::pair<std::size_t, std::size_t>> intervals;
};

struct LabeledChunk {
  std::vector<float> samples;
  int label = 0;
};

struct WindowConfig {
  double window_ms = 25.0;
  int sample_rate_hz = kDefaultSampleRateHz;

  // Window length in samples, round(window_ms * rate / 1000). Throws if < 1.
  std::size_t length() const;
};

struct WindowBounds {
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const WindowBounds&, const WindowBounds&) = default;
};

// Sample-wise sum of equally long sources. The result is not renormalized.
Waveform MixSources(std::span<const Waveform> sources);

// Contiguous, non-overlapping windows of length L starting at 0. The trailing
// remainder shorter than L is dropped.
std::vector<WindowBounds> MakeWindows(std::size_t total_len, const WindowConfig& cfg);

// count[n] = number of masks with an interval containing n.
std::vector<int> ActiveCountPerSample(std::span<const ActivityMask> masks,
                                      std::size_t total_len);

// Most frequent value; ties resolve to the smaller count.
int LabelChunkMode(std::span<const int> counts);

std::vector<LabeledChunk> SegmentAndLabel(const Waveform& mixture,
                                          std::span<const ActivityMask> masks,
                                          const WindowConfig& cfg);

// Throws kValidation unless every interval is sorted, non-overlapping and
// within [0, total_len].
void ValidateMask(const ActivityMask& mask, std::size_t total_len);

}  // namespace srccount
