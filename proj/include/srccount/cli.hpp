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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "srccount/error.hpp"
#include "srccount/model.hpp"
#include "srccount/training.hpp"

namespace srccount {

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  std::string manifest;
  // Class-balanced caps on the chunks drawn from each split; 0 keeps all.
  std::size_t max_train_chunks = 0;
  std::size_t max_val_chunks = 0;
  bool balanced = true;
};

// Strict: unknown keys and wrongly typed values are kConfiguration errors
// naming the dotted key path.
RunConfig ParseRunConfig(std::string_view json_text);
RunConfig LoadRunConfig(const std::filesystem::path& path);
std::string RunConfigToJson(const RunConfig& config);

// Applies "dotted.key=value" to a config document. The value is read as JSON
// when possible and as a string otherwise.
std::string ApplyOverride(std::string_view json_text, std::string_view assignment);

int ExitCodeFor(ErrorKind kind);
// One line: "error: <kind>: <message>".
std::string FormatErrorLine(std::string_view kind, std::string_view message);

int RunCli(int argc, char** argv);

}  // namespace srccount
