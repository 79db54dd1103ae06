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

#include "srccount/error.hpp"

namespace srccount {

std::string_view ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfiguration: return "configuration";
    case ErrorKind::kParameter: return "parameter";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kNumeric: return "numeric";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kNotFound: return "not_found";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kEmptyResult: return "empty_result";
    case ErrorKind::kBadMagic: return "bad_magic";
    case ErrorKind::kVersionMismatch: return "version_mismatch";
    case ErrorKind::kTruncatedPayload: return "truncated_payload";
    case ErrorKind::kShapeMismatch: return "shape_mismatch";
  }
  return "unknown";
}

}  // namespace srccount
