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

#include "srccount/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "srccount/error.hpp"
#include "srccount/parallel.hpp"

namespace srccount {
namespace {

using nlohmann::json;

std::vector<std::optional<double>> Row(std::initializer_list<double> values) {
  std::vector<std::optional<double>> row;
  for (double v : values) {
    if (v < 0) {
      row.emplace_back(std::nullopt);
    } else {
      row.emplace_back(v);
    }
  }
  row.resize(11, std::nullopt);
  return row;
}

json OptionalVector(const std::vector<std::optional<double>>& v) {
  json out = json::array();
  for (const auto& x : v) {
    if (x) {
      out.push_back(*x);
    } else {
      out.push_back(nullptr);
    }
  }
  return out;
}

std::string FormatNumber(double v) {
  std::ostringstream s;
  s.precision(10);
  s << v;
  return s.str();
}

}  // namespace

std::size_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p < n_classes; ++p) s += at(truth, p);
  return s;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t s = 0;
  for (std::size_t k = 0; k < n_classes; ++k) s += at(k, k);
  return s;
}

std::size_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

double ConfusionMatrix::mae() const {
  const std::size_t n = total();
  if (n == 0) return 0;
  std::size_t err = 0;
  for (std::size_t t = 0; t < n_classes; ++t) {
    for (std::size_t p = 0; p < n_classes; ++p) err += at(t, p) * (t > p ? t - p : p - t);
  }
  return static_cast<double>(err) / static_cast<double>(n);
}

double ReferenceRow::mean() const {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& a : accuracy) {
    if (a) {
      sum += *a;
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

const std::vector<ReferenceRow>& ReferenceTable() {
  static const std::vector<ReferenceRow> table = {
      {"Stoter et al. (BLSTM)", Row({100, 92, 86, 74, 67, 41, 37, 31, 45, 55, 49}), true},
      {"Wang et al.", Row({-1, 99, 85, 81, 56, 68, 40, 41, 25, 29, 68}), true},
      {"Stoter et al. (CRNN)", Row({98, 99, 90, 81, 69, 59, 55, 39, 35, 38, 68}), true},
      {"TaCNet", Row({100, 95, 89, 84, 79, 72, 68, 61, 53, 48, 71}), true},
      {"Yousefi et al.", Row({-1, 100, 91, 75, 82}), false},
      {"Zhang et al.", Row({-1, 94, 52, 36, 83}), false},
      {"Andrei et al.", Row({-1, 88, 80, 74}), false},
  };
  return table;
}

const ReferenceRow& TacnetReferenceRow() { return ReferenceTable()[3]; }

std::string ReferenceDiscrepancyNote() {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(3);
  s << "reference TaCNet row mean is " << TacnetReferenceRow().mean()
    << "% while the stated average accuracy is " << kStatedAverageAccuracy
    << "%; neither is asserted";
  return s.str();
}

EvalReport EvaluatePredictions(std::span<const int> predicted, std::span<const int> truth,
                               std::size_t n_classes) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorKind::kValidation, "prediction and label counts differ");
  }
  if (truth.empty()) throw Error(ErrorKind::kEmptyResult, "no chunks to evaluate");
  if (n_classes == 0) throw Error(ErrorKind::kConfiguration, "zero classes");
  const int limit = static_cast<int>(n_classes);

  EvalReport r;
  r.n_classes = n_classes;
  r.total = truth.size();
  r.confusion = ConfusionMatrix(n_classes);
  std::size_t abs_err = 0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (truth[k] < 0 || truth[k] >= limit) {
      throw Error(ErrorKind::kValidation, "label " + std::to_string(truth[k]) +
                                              " exceeds the model's maximum count " +
                                              std::to_string(limit - 1));
    }
    if (predicted[k] < 0 || predicted[k] >= limit) {
      throw Error(ErrorKind::kValidation, "prediction " + std::to_string(predicted[k]) +
                                              " outside [0, " + std::to_string(limit - 1) + "]");
    }
    ++r.confusion.at(static_cast<std::size_t>(truth[k]), static_cast<std::size_t>(predicted[k]));
    abs_err += static_cast<std::size_t>(std::abs(predicted[k] - truth[k]));
  }
  const auto total = static_cast<double>(r.total);
  r.mae = static_cast<double>(abs_err) / total;
  r.mae_from_confusion = r.confusion.mae();
  r.overall_accuracy = 100.0 * static_cast<double>(r.confusion.trace()) / total;
  for (std::size_t k = 0; k < n_classes; ++k) {
    const std::size_t rows = r.confusion.row_sum(k);
    if (rows == 0) {
      r.per_class_accuracy.emplace_back(std::nullopt);
    } else {
      r.per_class_accuracy.emplace_back(100.0 * static_cast<double>(r.confusion.at(k, k)) /
                                        static_cast<double>(rows));
    }
  }
  const auto& ref = TacnetReferenceRow().accuracy;
  if (n_classes == ref.size()) {
    std::vector<std::optional<double>> delta;
    for (std::size_t k = 0; k < n_classes; ++k) {
      if (r.per_class_accuracy[k] && ref[k]) {
        delta.emplace_back(*r.per_class_accuracy[k] - *ref[k]);
      } else {
        delta.emplace_back(std::nullopt);
      }
    }
    r.reference_delta = std::move(delta);
  }
  return r;
}

EvalReport Evaluate(const Model<float>& model, std::span<const LabeledChunk> chunks,
                    std::size_t threads) {
  if (chunks.empty()) throw Error(ErrorKind::kEmptyResult, "no chunks to evaluate");
  const int n_classes = static_cast<int>(model.n_classes());
  std::vector<int> truth(chunks.size()), predicted(chunks.size());
  for (std::size_t k = 0; k < chunks.size(); ++k) {
    truth[k] = chunks[k].label;
    if (truth[k] < 0 || truth[k] >= n_classes) {
      throw Error(ErrorKind::kValidation, "label " + std::to_string(truth[k]) +
                                              " exceeds the model's maximum count " +
                                              std::to_string(n_classes - 1));
    }
  }
  ParallelFor(chunks.size(), threads, [&](std::size_t k) {
    predicted[k] = Predict<float>(PredictProbs(model, std::span<const float>(chunks[k].samples)));
  });
  return EvaluatePredictions(predicted, truth, model.n_classes());
}

std::string ReportToJson(const EvalReport& r) {
  json confusion = json::array();
  for (std::size_t t = 0; t < r.n_classes; ++t) {
    json row = json::array();
    for (std::size_t p = 0; p < r.n_classes; ++p) row.push_back(r.confusion.at(t, p));
    confusion.push_back(row);
  }
  json j = {{"n_classes", r.n_classes},
            {"total", r.total},
            {"overall_accuracy", r.overall_accuracy},
            {"per_class_accuracy", OptionalVector(r.per_class_accuracy)},
            {"mae", r.mae},
            {"mae_from_confusion", r.mae_from_confusion},
            {"confusion", confusion}};
  if (r.reference_delta) {
    j["reference"] = {{"model", TacnetReferenceRow().model},
                      {"per_class_accuracy", OptionalVector(TacnetReferenceRow().accuracy)},
                      {"row_mean", TacnetReferenceRow().mean()},
                      {"stated_average", kStatedAverageAccuracy},
                      {"note", ReferenceDiscrepancyNote()}};
    j["reference_delta"] = OptionalVector(*r.reference_delta);
  }
  return j.dump(2);
}

std::string ConfusionToCsv(const ConfusionMatrix& c) {
  std::ostringstream s;
  s << "true\\predicted";
  for (std::size_t p = 0; p < c.n_classes; ++p) s << ',' << p;
  s << '\n';
  for (std::size_t t = 0; t < c.n_classes; ++t) {
    s << t;
    for (std::size_t p = 0; p < c.n_classes; ++p) s << ',' << c.at(t, p);
    s << '\n';
  }
  return s.str();
}

std::string ReportToText(const EvalReport& r) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << "chunks " << r.total << "  accuracy " << r.overall_accuracy << "%  mae " << r.mae << '\n';
  s << "count  n       acc%";
  if (r.reference_delta) s << "    ref%   delta";
  s << '\n';
  const auto& ref = TacnetReferenceRow().accuracy;
  for (std::size_t k = 0; k < r.n_classes; ++k) {
    s << std::string(k < 10 ? 1 : 0, ' ') << k << "     " << r.confusion.row_sum(k);
    s << std::string(8 - std::min<std::size_t>(7, std::to_string(r.confusion.row_sum(k)).size()), ' ');
    if (r.per_class_accuracy[k]) {
      s << *r.per_class_accuracy[k];
    } else {
      s << "-";
    }
    if (r.reference_delta) {
      s << "   " << (ref[k] ? FormatNumber(*ref[k]) : "-") << "   ";
      const auto& d = (*r.reference_delta)[k];
      if (d) {
        s << std::showpos << *d << std::noshowpos;
      } else {
        s << "-";
      }
    }
    s << '\n';
  }
  if (r.reference_delta) s << ReferenceDiscrepancyNote() << '\n';
  return s.str();
}

std::vector<SweepRow> MaeWindowSweep(const DatasetManifest& manifest, const SweepOptions& options) {
  if (options.sizes_ms.empty()) throw Error(ErrorKind::kConfiguration, "no window sizes given");
  std::vector<SweepRow> rows;
  for (double ms : options.sizes_ms) {
    SweepRow row;
    row.window_ms = ms;
    try {
      if (!(ms > 0)) throw Error(ErrorKind::kConfiguration, "window size must be positive");
      const WindowConfig window{ms, manifest.window.sample_rate_hz};
      const auto data = ChunkDataset(manifest, window);
      auto train = RandomSubsample(data.train.chunks, options.max_train_chunks, options.seed);
      auto test = RandomSubsample(data.test.chunks, options.max_eval_chunks, options.seed + 1);
      auto val = RandomSubsample(data.val.chunks, options.max_eval_chunks, options.seed + 2);
      if (train.empty() || test.empty()) {
        throw Error(ErrorKind::kEmptyResult, "window yields zero chunks in the train or test split");
      }
      if (val.empty()) val = test;
      row.train_chunks = train.size();
      row.test_chunks = test.size();
      ModelConfig mc = options.model;
      mc.window = window;
      auto model = BuildModel<float>(mc, options.seed);
      auto result = TrainLoop(train, val, std::move(model), options.train);
      row.mae = Evaluate(result.best, test, options.train.threads).mae;
      spdlog::info("sweep {} ms: mae {:.4f}", ms, *row.mae);
    } catch (const Error& e) {
      row.error = std::string(ToString(e.kind())) + ": " + e.what();
      spdlog::error("sweep {} ms failed: {}", ms, row.error);
    }
    rows.push_back(std::move(row));
  }
  spdlog::info("{}", kSweepReferenceNote);
  return rows;
}

std::string SweepToCsv(std::span<const SweepRow> rows) {
  std::ostringstream s;
  s << "window_ms,mae\n";
  for (const auto& r : rows) {
    s << FormatNumber(r.window_ms) << ',';
    if (r.mae) s << FormatNumber(*r.mae);
    s << '\n';
  }
  return s.str();
}

std::vector<double> ParseSizeList(std::string_view text) {
  std::vector<double> sizes;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = text.find(',', pos);
    std::string token(text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos));
    const auto first = token.find_first_not_of(" \t");
    const auto last = token.find_last_not_of(" \t");
    token = first == std::string::npos ? "" : token.substr(first, last - first + 1);
    double v = 0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (token.empty() || ec != std::errc() || end != token.data() + token.size() || !(v > 0) ||
        !std::isfinite(v)) {
      throw Error(ErrorKind::kParse, "invalid window size '" + token + "'");
    }
    sizes.push_back(v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return sizes;
}

}  // namespace srccount
