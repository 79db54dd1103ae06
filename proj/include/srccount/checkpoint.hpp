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

#include <filesystem>
#include <string>
#include <string_view>

#include "srccount/model.hpp"

namespace srccount {

// Layout: the 7 magic bytes, a 4-byte little-endian header length, a UTF-8
// JSON header (format version, window, frontend and classifier configuration,
// tensor directory of name/shape/dtype/offset), then little-endian float32
// payload in directory order.
inline constexpr std::string_view kCheckpointMagic = "TACNET1";
inline constexpr int kCheckpointVersion = 1;

std::string SerializeCheckpoint(const Model<float>& model);

// Throws kBadMagic, kVersionMismatch, kTruncatedPayload or kShapeMismatch.
Model<float> ParseCheckpoint(std::string_view bytes);

void SaveCheckpoint(const Model<float>& model, const std::filesystem::path& path);
Model<float> LoadCheckpoint(const std::filesystem::path& path);

}  // namespace srccount
