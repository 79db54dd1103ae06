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

#include "srccount/signal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "srccount/error.hpp"

namespace srccount {

std::size_t WindowConfig::length() const {
  if (!(window_ms > 0.0) || sample_rate_hz <= 0) {
    throw Error(ErrorKind::kConfiguration,
                "window_ms and sample_rate_hz must be positive (got " +
                    std::to_string(window_ms) + " ms, " +
                    std::to_string(sample_rate_hz) + " Hz)");
  }
  const double len = std::round(window_ms * sample_rate_hz / 1000.0);
  if (len < 1.0) {
    throw Error(ErrorKind::kConfiguration,
                "window of " + std::to_string(window_ms) + " ms is shorter than one sample");
  }
  return static_cast<std::size_t>(len);
}

Waveform MixSources(std::span<const Waveform> sources) {
  if (sources.empty()) {
    throw Error(ErrorKind::kConfiguration, "mix_sources needs at least one source");
  }
  const auto& first = sources.front();
  Waveform out;
  out.sample_rate_hz = first.sample_rate_hz;
  out.samples.assign(first.size(), 0.0);
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto& src = sources[i];
    if (src.size() != first.size()) {
      throw Error(ErrorKind::kConfiguration,
                  "source " + std::to_string(i) + " has length " + std::to_string(src.size()) +
                      " but source 0 has length " + std::to_string(first.size()));
    }
    if (src.sample_rate_hz != first.sample_rate_hz) {
      throw Error(ErrorKind::kConfiguration,
                  "source " + std::to_string(i) + " has sample rate " +
                      std::to_string(src.sample_rate_hz) + " Hz but source 0 has " +
                      std::to_string(first.sample_rate_hz) + " Hz");
    }
    for (std::size_t n = 0; n < src.size(); ++n) out.samples[n] += src.samples[n];
  }
  return out;
}

std::vector<WindowBounds> MakeWindows(std::size_t total_len, const WindowConfig& cfg) {
  const std::size_t len = cfg.length();
  if (total_len < len) {
    throw Error(ErrorKind::kEmptyResult,
                "input shorter than one window (" + std::to_string(total_len) + " < " +
                    std::to_string(len) + " samples)");
  }
  const std::size_t count = total_len / len;
  std::vector<WindowBounds> windows;
  windows.reserve(count);
  for (std::size_t i = 0; i < count; ++i) windows.push_back({i * len, (i + 1) * len});
  return windows;
}

void ValidateMask(const ActivityMask& mask, std::size_t total_len) {
  std::size_t prev_end = 0;
  for (std::size_t k = 0; k < mask.intervals.size(); ++k) {
    const auto [start, end] = mask.intervals[k];
    if (!(start < end) || end > total_len) {
      throw Error(ErrorKind::kValidation,
                  "interval [" + std::to_string(start) + ", " + std::to_string(end) +
                      ") outside [0, " + std::to_string(total_len) + "]");
    }
    if (k > 0 && start < prev_end) {
      throw Error(ErrorKind::kValidation,
                  "intervals unsorted or overlapping at [" + std::to_string(start) + ", " +
                      std::to_string(end) + ")");
    }
    prev_end = end;
  }
}

std::vector<int> ActiveCountPerSample(std::span<const ActivityMask> masks,
                                      std::size_t total_len) {
  // Difference array: +1 at start, -1 at end, then prefix sum.
  std::vector<int> delta(total_len + 1, 0);
  for (const auto& mask : masks) {
    ValidateMask(mask, total_len);
    for (const auto& [start, end] : mask.intervals) {
      ++delta[start];
      --delta[end];
    }
  }
  std::vector<int> counts(total_len);
  int running = 0;
  for (std::size_t n = 0; n < total_len; ++n) {
    running += delta[n];
    counts[n] = running;
  }
  return counts;
}

int LabelChunkMode(std::span<const int> counts) {
  if (counts.empty()) {
    throw Error(ErrorKind::kValidation, "mode of an empty count vector");
  }
  // std::map iterates keys in ascending order, so the first maximum wins ties.
  std::map<int, std::size_t> freq;
  for (int c : counts) {
    if (c < 0) throw Error(ErrorKind::kValidation, "negative active count " + std::to_string(c));
    ++freq[c];
  }
  int best = freq.begin()->first;
  std::size_t best_n = 0;
  for (const auto& [value, n] : freq) {
    if (n > best_n) {
      best = value;
      best_n = n;
    }
  }
  return best;
}

std::vector<LabeledChunk> SegmentAndLabel(const Waveform& mixture,
                                          std::span<const ActivityMask> masks,
                                          const WindowConfig& cfg) {
  const auto windows = MakeWindows(mixture.size(), cfg);
  const auto counts = ActiveCountPerSample(masks, mixture.size());
  std::vector<LabeledChunk> chunks;
  chunks.reserve(windows.size());
  for (const auto& w : windows) {
    LabeledChunk chunk;
    chunk.samples.assign(mixture.samples.begin() + static_cast<std::ptrdiff_t>(w.begin),
                         mixture.samples.begin() + static_cast<std::ptrdiff_t>(w.end));
    chunk.label = LabelChunkMode(std::span(counts).subspan(w.begin, w.end - w.begin));
    chunks.push_back(std::move(chunk));
  }
  return chunks;
}

}  // namespace srccount
