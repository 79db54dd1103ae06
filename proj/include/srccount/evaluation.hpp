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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "srccount/datasets.hpp"
#include "srccount/model.hpp"
#include "srccount/training.hpp"

namespace srccount {

// Rows are true labels, columns predictions.
struct ConfusionMatrix {
  std::size_t n_classes = 0;
  std::vector<std::size_t> counts;  // row-major n_classes x n_classes

  explicit ConfusionMatrix(std::size_t n = 0) : n_classes(n), counts(n * n, 0) {}

  std::size_t& at(std::size_t truth, std::size_t predicted) {
    return counts[truth * n_classes + predicted];
  }
  std::size_t at(std::size_t truth, std::size_t predicted) const {
    return counts[truth * n_classes + predicted];
  }
  std::size_t row_sum(std::size_t truth) const;
  std::size_t trace() const;
  std::size_t total() const;
  // Mean |predicted - truth| weighted by the cell counts.
  double mae() const;
};

struct ReferenceRow {
  std::string model;
  std::vector<std::optional<double>> accuracy;  // percent per count 0..10; nullopt = not reported
  bool full_range = true;                        // evaluated on all eleven classes
  double mean() const;                           // over reported entries
};

// Published per-class counting accuracies on LibriCount.
const std::vector<ReferenceRow>& ReferenceTable();
const ReferenceRow& TacnetReferenceRow();
// Average accuracy stated alongside the table, which differs from the row mean.
inline constexpr double kStatedAverageAccuracy = 74.18;
std::string ReferenceDiscrepancyNote();

struct EvalReport {
  std::size_t n_classes = 0;
  std::size_t total = 0;
  std::vector<std::optional<double>> per_class_accuracy;  // percent; nullopt for absent classes
  double overall_accuracy = 0;                            // percent
  double mae = 0;                                         // streamed over chunks
  double mae_from_confusion = 0;
  ConfusionMatrix confusion;
  // Per-class accuracy minus the reference TaCNet row; present when there are 11 classes.
  std::optional<std::vector<std::optional<double>>> reference_delta;
};

// Throws kValidation for labels or predictions outside [0, n_classes) and
// kEmptyResult for an empty set.
EvalReport EvaluatePredictions(std::span<const int> predicted, std::span<const int> truth,
                               std::size_t n_classes);

EvalReport Evaluate(const Model<float>& model, std::span<const LabeledChunk> chunks,
                    std::size_t threads = 0);

std::string ReportToJson(const EvalReport& report);
std::string ConfusionToCsv(const ConfusionMatrix& confusion);
// Human-readable per-class table, including reference deltas when present.
std::string ReportToText(const EvalReport& report);

struct SweepOptions {
  std::vector<double> sizes_ms{10, 15, 20, 25, 30, 35, 40};
  ModelConfig model;
  TrainConfig train;
  // Deterministic subsample caps per split; 0 keeps everything.
  std::size_t max_train_chunks = 0;
  std::size_t max_eval_chunks = 0;
  std::uint64_t seed = 0;
};

struct SweepRow {
  double window_ms = 0;
  std::optional<double> mae;
  std::string error;  // set when the row failed
  std::size_t train_chunks = 0;
  std::size_t test_chunks = 0;
};

inline constexpr std::string_view kSweepReferenceNote =
    "reference expectation: minimum MAE at a 25 ms window (not asserted)";

// Re-chunks, trains under the fixed budget and scores test-split MAE for each
// size. A failing size yields an error row and the sweep continues.
std::vector<SweepRow> MaeWindowSweep(const DatasetManifest& manifest, const SweepOptions& options);

// Header `window_ms,mae`; failed rows leave the mae field empty.
std::string SweepToCsv(std::span<const SweepRow> rows);

// Parses "10,15,20"; throws kParse naming the offending token.
std::vector<double> ParseSizeList(std::string_view text);

}  // namespace srccount
