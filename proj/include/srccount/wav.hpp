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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "srccount/signal.hpp"

namespace srccount {

// RIFF/WAVE, PCM format 1, 16-bit, mono. Samples are scaled by 1/32768.
Waveform ReadWav(const std::filesystem::path& path);
Waveform ParseWav(std::string_view bytes);

// Values outside [-1, 1) saturate.
void WriteWav(const std::filesystem::path& path, const Waveform& wave);
std::vector<std::int16_t> QuantizePcm16(std::span<const double> samples);

}  // namespace srccount
