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

#include "srccount/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "srccount/error.hpp"
#include "srccount/parallel.hpp"

namespace srccount {
namespace {

template <typename T>
bool AllFinite(std::span<const T> v) {
  return std::all_of(v.begin(), v.end(), [](T e) { return std::isfinite(e); });
}

std::string DiagnoseNonFinite(const Model<float>& model, std::span<const float> chunk) {
  for (const auto& view : ParameterViews(model)) {
    if (!AllFinite(view.values)) return "parameter " + view.name + " is non-finite";
  }
  if (!AllFinite(chunk)) return "input chunk contains non-finite samples";
  FrontendCache<float> cache;
  FeatureMap<float> features;
  try {
    features = FrontendForward(chunk, model.frontend, &cache);
  } catch (const Error& e) {
    return std::string("frontend stage failed: ") + e.what();
  }
  if (!AllFinite(std::span<const float>(cache.y1.values))) return "filter stage output is non-finite";
  if (!AllFinite(std::span<const float>(cache.y2.values))) return "pooling stage output is non-finite";
  if (!AllFinite(std::span<const float>(features.values))) return "PCEN stage output is non-finite";
  const auto logits = ClassifierLogits(features, model.classifier);
  if (!AllFinite(std::span<const float>(logits))) return "classifier stage produced non-finite logits";
  return "loss is non-finite although every stage is finite";
}

void CheckBatch(std::span<const LabeledChunk> batch, const Model<float>& model) {
  if (batch.empty()) throw Error(ErrorKind::kConfiguration, "empty batch");
  const std::size_t len = model.chunk_length();
  for (const auto& c : batch) {
    if (c.samples.size() != len) {
      throw Error(ErrorKind::kConfiguration,
                  "batch chunk has " + std::to_string(c.samples.size()) +
                      " samples, model expects " + std::to_string(len));
    }
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw Error(ErrorKind::kConfiguration, "batch_size must be >= 1");
  if (!(learning_rate >= 0.0)) throw Error(ErrorKind::kConfiguration, "learning_rate must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(adam_eps > 0.0)) {
    throw Error(ErrorKind::kConfiguration, "invalid Adam coefficients");
  }
  if (!(frontend_lr_scale >= 0.0)) {
    throw Error(ErrorKind::kConfiguration, "frontend_lr_scale must be >= 0");
  }
}

void AdamOptimizer::Step(Model<float>& params, const Model<float>& grads) {
  auto p = ParameterViews(params);
  const auto g = ParameterViews(grads);
  if (m_.empty()) {
    for (const auto& v : p) {
      m_.emplace_back(v.values.size(), 0.0f);
      v_.emplace_back(v.values.size(), 0.0f);
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const auto b1 = static_cast<float>(beta1_), b2 = static_cast<float>(beta2_);
  for (std::size_t k = 0; k < p.size(); ++k) {
    auto& m = m_[k];
    auto& v = v_[k];
    const double lr = p[k].name.starts_with("frontend.") ? lr_ * frontend_scale_ : lr_;
    for (std::size_t j = 0; j < p[k].values.size(); ++j) {
      const float gj = g[k].values[j];
      m[j] = b1 * m[j] + (1.0f - b1) * gj;
      v[j] = b2 * v[j] + (1.0f - b2) * gj * gj;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      p[k].values[j] -= static_cast<float>(lr * mhat / (std::sqrt(vhat) + eps_));
    }
  }
}

TrainState MakeTrainState(Model<float> model, const TrainConfig& cfg) {
  cfg.validate();
  return {std::move(model), AdamOptimizer(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps,
                                              cfg.frontend_lr_scale)};
}

StepResult TrainStep(std::span<const LabeledChunk> batch, TrainState& state, const TrainConfig& cfg) {
  CheckBatch(batch, state.model);
  const std::size_t n = batch.size();
  std::vector<Model<float>> grads(n);
  std::vector<ChunkEval<float>> evals(n);
  ParallelFor(n, cfg.threads, [&](std::size_t k) {
    const std::span<const float> chunk(batch[k].samples);
    try {
      evals[k] = LossAndGradients(state.model, chunk, batch[k].label, grads[k]);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kNumeric) throw;
      throw Error(ErrorKind::kNumeric, "batch item " + std::to_string(k) + ": " + e.what() +
                                           "; " + DiagnoseNonFinite(state.model, chunk));
    }
  });

  double loss = 0;
  std::size_t correct = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(evals[k].loss)) {
      throw Error(ErrorKind::kNumeric,
                  "non-finite loss on batch item " + std::to_string(k) + ": " +
                      DiagnoseNonFinite(state.model, std::span<const float>(batch[k].samples)));
    }
    loss += evals[k].loss;
    if (evals[k].predicted == batch[k].label) ++correct;
  }

  Model<float>& total = grads[0];
  for (std::size_t k = 1; k < n; ++k) AddInPlace(total, grads[k]);
  ScaleInPlace(total, 1.0f / static_cast<float>(n));
  for (const auto& view : ParameterViews(std::as_const(total))) {
    if (!AllFinite(view.values)) {
      throw Error(ErrorKind::kNumeric, "non-finite gradient for parameter " + view.name);
    }
  }

  state.optimizer.Step(state.model, total);
  ClampFrontend(state.model.frontend, state.model.chunk_length(), cfg.clamp);
  return {loss / static_cast<double>(n), static_cast<double>(correct) / static_cast<double>(n)};
}

std::string ToJsonLine(const EpochRecord& record) {
  nlohmann::json j = {{"epoch", record.epoch},
                      {"train_loss", record.train_loss},
                      {"val_loss", record.val_loss},
                      {"val_accuracy", record.val_accuracy},
                      {"wall_seconds", record.wall_seconds}};
  return j.dump();
}

StepResult EvaluateLoss(const Model<float>& model, std::span<const LabeledChunk> chunks,
                        std::size_t threads) {
  if (chunks.empty()) return {};
  std::vector<ChunkEval<float>> evals(chunks.size());
  ParallelFor(chunks.size(), threads, [&](std::size_t k) {
    evals[k] = EvaluateChunk(model, std::span<const float>(chunks[k].samples), chunks[k].label);
  });
  double loss = 0;
  std::size_t correct = 0;
  for (std::size_t k = 0; k < chunks.size(); ++k) {
    loss += evals[k].loss;
    if (evals[k].predicted == chunks[k].label) ++correct;
  }
  const auto n = static_cast<double>(chunks.size());
  return {loss / n, static_cast<double>(correct) / n};
}

TrainResult TrainLoop(std::span<const LabeledChunk> train, std::span<const LabeledChunk> val,
                      Model<float> init, const TrainConfig& cfg,
                      const std::function<void(const EpochRecord&)>& on_epoch) {
  cfg.validate();
  if (train.empty()) throw Error(ErrorKind::kConfiguration, "empty training set");
  if (val.empty()) throw Error(ErrorKind::kConfiguration, "empty validation set");

  TrainResult result;
  result.best = init;
  TrainState state = MakeTrainState(std::move(init), cfg);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<LabeledChunk> batch;
  std::size_t stale_epochs = 0;
  std::size_t steps = 0;
  const auto start = std::chrono::steady_clock::now();

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0;
    std::size_t seen = 0;
    bool budget_hit = false;
    for (std::size_t pos = 0; pos < order.size(); pos += cfg.batch_size) {
      if (cfg.max_steps && steps >= *cfg.max_steps) {
        budget_hit = true;
        break;
      }
      const std::size_t end = std::min(order.size(), pos + cfg.batch_size);
      batch.clear();
      for (std::size_t k = pos; k < end; ++k) batch.push_back(train[order[k]]);
      const auto r = TrainStep(batch, state, cfg);
      result.loss_trace.push_back(r.loss);
      loss_sum += r.loss * static_cast<double>(batch.size());
      seen += batch.size();
      ++steps;
    }
    if (seen == 0) break;

    const auto v = EvaluateLoss(state.model, val, cfg.threads);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(seen);
    rec.val_loss = v.loss;
    rec.val_accuracy = v.accuracy;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(rec);
    spdlog::info("epoch {} train_loss {:.4f} val_loss {:.4f} val_acc {:.4f} ({:.1f}s)", epoch,
                 rec.train_loss, rec.val_loss, rec.val_accuracy, rec.wall_seconds);
    if (on_epoch) on_epoch(rec);

    if (v.accuracy > result.best_val_accuracy) {
      result.best_val_accuracy = v.accuracy;
      result.best = state.model;
      stale_epochs = 0;
    } else if (cfg.patience && ++stale_epochs > *cfg.patience) {
      break;
    }
    if (budget_hit || (cfg.max_steps && steps >= *cfg.max_steps)) break;
  }
  return result;
}

std::string_view ToString(CheckStatus status) {
  switch (status) {
    case CheckStatus::kPass: return "pass";
    case CheckStatus::kFail: return "FAIL";
    case CheckStatus::kDegenerate: return "degenerate, skipped";
  }
  return "unknown";
}

bool GradCheckReport::all_pass() const {
  return std::none_of(tensors.begin(), tensors.end(),
                      [](const TensorCheck& t) { return t.status == CheckStatus::kFail; });
}

std::string GradCheckReport::ToTable() const {
  std::ostringstream os;
  os << std::left << std::setw(18) << "tensor" << std::right << std::setw(8) << "size"
     << std::setw(9) << "checked" << std::setw(9) << "refined" << std::setw(7) << "kinks" << std::setw(14) << "max_rel_err"
     << "  status\n";
  for (const auto& t : tensors) {
    os << std::left << std::setw(18) << t.name << std::right << std::setw(8) << t.size
       << std::setw(9) << t.checked << std::setw(9) << t.refined << std::setw(7) << t.kink_skipped << std::setw(14)
       << std::scientific << std::setprecision(3) << t.max_rel_error << std::defaultfloat
       << "  " << ToString(t.status) << "\n";
  }
  return os.str();
}

// Step reductions tried when a stencil crosses a rectifier kink.
constexpr int kStepRefinements = 3;

GradCheckReport GradCheck(const Model<double>& model, std::span<const double> chunk, int label,
                          const GradCheckOptions& options) {
  Model<double> analytic = ZeroGradients(model);
  std::vector<std::uint8_t> base_pattern;
  LossAndGradients(model, chunk, label, analytic, &base_pattern);

  Model<double> work = model;
  auto params = ParameterViews(work);
  const auto grads = ParameterViews(std::as_const(analytic));
  const double h = options.step;

  GradCheckReport report;
  std::vector<std::uint8_t> pattern;
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto& view = params[t];
    TensorCheck check;
    check.name = view.name;
    check.size = view.values.size();

    std::vector<std::size_t> indices(view.values.size());
    std::iota(indices.begin(), indices.end(), 0);
    if (options.per_tensor > 0 && indices.size() > options.per_tensor) {
      std::mt19937_64 rng(options.seed * 1000003ULL + t);
      std::shuffle(indices.begin(), indices.end(), rng);
      indices.resize(options.per_tensor);
      std::sort(indices.begin(), indices.end());
    }

    const bool corrupt = view.name == options.corrupt_tensor;
    for (std::size_t j : indices) {
      double a = grads[t].values[j];
      if (corrupt) a = a * 1.1 + 1e-4;
      const double p0 = view.values[j];
      static constexpr double kOffsets[6] = {3.0, 2.0, 1.0, -1.0, -2.0, -3.0};
      static constexpr double kWeights[6] = {1.0, -9.0, 45.0, -45.0, 9.0, -1.0};
      double numeric = 0;
      bool kink = true;
      double step = h * 10.0;
      for (int attempt = 0; attempt < kStepRefinements && kink; ++attempt) {
        step /= 10.0;
        numeric = 0;
        kink = false;
        for (int q = 0; q < 6 && !kink; ++q) {
          view.values[j] = p0 + kOffsets[q] * step;
          numeric += kWeights[q] * LossOnly(work, chunk, label, &pattern);
          kink = pattern != base_pattern;
        }
        if (!kink && attempt > 0) ++check.refined;
      }
      view.values[j] = p0;
      if (kink) {
        ++check.kink_skipped;
        continue;
      }
      numeric /= 60.0 * step;
      const double scale = std::max({std::abs(a), std::abs(numeric), options.abs_floor});
      check.max_rel_error = std::max(check.max_rel_error, std::abs(a - numeric) / scale);
      check.max_abs_grad = std::max({check.max_abs_grad, std::abs(a), std::abs(numeric)});
      ++check.checked;
    }

    if (check.checked == 0) {
      check.status = CheckStatus::kFail;
    } else if (check.max_abs_grad < options.degenerate_below) {
      check.status = CheckStatus::kDegenerate;
    } else {
      check.status = check.max_rel_error < options.tolerance ? CheckStatus::kPass : CheckStatus::kFail;
    }
    report.tensors.push_back(std::move(check));
  }
  return report;
}

GradCheckCase MakeGradCheckCase(std::uint64_t seed, std::size_t n_classes) {
  ModelConfig cfg;
  cfg.window = {25.0, kDefaultSampleRateHz};
  cfg.n_filters = 8;
  cfg.kernel_width = 101;
  cfg.classifier.n_classes = n_classes;
  GradCheckCase c;
  c.model = BuildModel<double>(cfg, seed);
  std::mt19937_64 rng(seed * 7919ULL + 17ULL);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto& f = c.model.frontend;
  for (std::size_t k = 0; k < f.n_filters(); ++k) {
    f.gabor.mu[k] *= 0.9 + 0.2 * u(rng);
    f.gabor.sigma_t[k] *= 0.8 + 0.4 * u(rng);
    f.pooling.sigma_p[k] = 20.0 + 40.0 * u(rng);
    f.pcen.alpha[k] = 0.5 + 0.49 * u(rng);
    f.pcen.delta[k] = 1.0 + 2.0 * u(rng);
    f.pcen.r[k] = 0.3 + 0.4 * u(rng);
  }
  ClampFrontend(f, c.model.chunk_length(), TrainConfig{}.clamp);

  c.chunk.assign(c.model.chunk_length(), 0.0);
  const double rate = c.model.window.sample_rate_hz;
  for (int tone = 0; tone < 3; ++tone) {
    const double freq = 100.0 + 3000.0 * u(rng);
    const double amp = 0.05 + 0.2 * u(rng);
    const double phase = 2.0 * std::numbers::pi * u(rng);
    for (std::size_t n = 0; n < c.chunk.size(); ++n) {
      c.chunk[n] += amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(n) / rate + phase);
    }
  }
  for (double& v : c.chunk) v += 0.01 * (u(rng) - 0.5);
  c.label = static_cast<int>(seed % n_classes);
  return c;
}

}  // namespace srccount
