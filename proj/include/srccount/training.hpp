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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srccount/model.hpp"
#include "srccount/signal.hpp"

namespace srccount {

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  // Learning-rate multiplier for the frontend parameter group.
  double frontend_lr_scale = 1.0;
  std::uint64_t seed = 0;
  FrontendClampRules clamp;
  // Stop once this many consecutive epochs fail to improve validation accuracy.
  std::optional<std::size_t> patience;
  // Total optimizer-step budget across epochs.
  std::optional<std::size_t> max_steps;
  std::size_t threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

// Adaptive moment estimation with bias correction.
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(double lr, double beta1, double beta2, double eps, double frontend_scale = 1.0)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), frontend_scale_(frontend_scale) {}

  void Step(Model<float>& params, const Model<float>& grads);
  std::uint64_t steps() const { return t_; }

 private:
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8, frontend_scale_ = 1.0;
  std::uint64_t t_ = 0;
  std::vector<std::vector<float>> m_, v_;
};

struct TrainState {
  Model<float> model;
  AdamOptimizer optimizer;
};

TrainState MakeTrainState(Model<float> model, const TrainConfig& cfg);

struct StepResult {
  double loss = 0;
  double accuracy = 0;
};

// Forward, mean cross-entropy, backward, Adam update, then frontend clamping.
// Throws kNumeric naming the offending stage or parameter on a non-finite loss.
StepResult TrainStep(std::span<const LabeledChunk> batch, TrainState& state, const TrainConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0;
  double val_loss = 0;
  double val_accuracy = 0;
  double wall_seconds = 0;
};

// One line of line-delimited JSON.
std::string ToJsonLine(const EpochRecord& record);

struct TrainResult {
  Model<float> best;
  double best_val_accuracy = -1;
  std::vector<EpochRecord> history;
  std::vector<double> loss_trace;  // per optimizer step
};

// Mean loss and accuracy over a chunk set, inference only.
StepResult EvaluateLoss(const Model<float>& model, std::span<const LabeledChunk> chunks,
                        std::size_t threads);

TrainResult TrainLoop(std::span<const LabeledChunk> train, std::span<const LabeledChunk> val,
                      Model<float> init, const TrainConfig& cfg,
                      const std::function<void(const EpochRecord&)>& on_epoch = {});

struct GradCheckOptions {
  double step = 1e-4;
  double tolerance = 1e-5;
  // Scalars sampled per tensor; tensors this small or smaller are checked fully.
  // 0 checks every scalar.
  std::size_t per_tensor = 64;
  // Denominator floor of the relative error.
  double abs_floor = 1e-6;
  // Below this magnitude everywhere the tensor is reported as degenerate.
  double degenerate_below = 1e-10;
  std::uint64_t seed = 0;
  // Test hook: perturb the analytic gradient of this tensor.
  std::string corrupt_tensor;
};

enum class CheckStatus { kPass, kFail, kDegenerate };

struct TensorCheck {
  std::string name;
  std::size_t size = 0;
  std::size_t checked = 0;
  std::size_t refined = 0;  // checked at a reduced step to avoid a kink
  std::size_t kink_skipped = 0;
  double max_rel_error = 0;
  double max_abs_grad = 0;
  CheckStatus status = CheckStatus::kPass;
};

struct GradCheckReport {
  std::vector<TensorCheck> tensors;
  bool all_pass() const;
  std::string ToTable() const;
};

// Compares analytic gradients of the full loss with sixth-order central
// differences. A stencil that crosses a rectifier kink is retried at step/10
// and step/100; scalars still crossing one are skipped.
GradCheckReport GradCheck(const Model<double>& model, std::span<const double> chunk, int label,
                          const GradCheckOptions& options = {});

std::string_view ToString(CheckStatus status);

struct GradCheckCase {
  Model<double> model;
  std::vector<double> chunk;
  int label = 0;
};

// Small double-precision model (8 filters, 101-tap kernels, 400-sample chunk,
// compact classifier) with seeded perturbations of every frontend parameter,
// plus a seeded multi-tone chunk and label.
GradCheckCase MakeGradCheckCase(std::uint64_t seed, std::size_t n_classes = 11);

}  // namespace srccount
