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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "srccount/error.hpp"
#include "srccount/training.hpp"

using namespace srccount;

namespace {

ModelConfig SmallModelConfig(std::size_t classes) {
  ModelConfig c;
  c.n_filters = 8;
  c.kernel_width = 101;
  c.classifier.conv_blocks = {{4, 3, 3, 1}, {6, 3, 3, 2}, {8, 3, 3, 2}};
  c.classifier.hidden_dim = 16;
  c.classifier.n_classes = classes;
  return c;
}

// Class 0: faint noise. Class 1: a loud low tone plus noise.
std::vector<LabeledChunk> TwoClassChunks(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::uniform_real_distribution<double> phase(0.0, 2 * std::numbers::pi);
  std::vector<LabeledChunk> out;
  for (std::size_t k = 0; k < n; ++k) {
    LabeledChunk c;
    c.label = static_cast<int>(k % 2);
    c.samples.resize(400);
    const double ph = phase(rng);
    for (std::size_t i = 0; i < 400; ++i) {
      double v = noise(rng);
      if (c.label == 1) v += 0.5 * std::sin(2 * std::numbers::pi * 0.02 * static_cast<double>(i) + ph);
      c.samples[i] = static_cast<float>(v);
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<float> Flatten(const Model<float>& m) {
  std::vector<float> out;
  for (const auto& v : ParameterViews(m)) out.insert(out.end(), v.values.begin(), v.values.end());
  return out;
}

}  // namespace

TEST_CASE("cross-entropy examples") {
  const std::vector<double> uniform(11, 1.0 / 11.0);
  CHECK(CrossEntropyLoss<double>(uniform, 3) == doctest::Approx(2.3979).epsilon(1e-4));
  CHECK(CrossEntropyLoss<double>(uniform, 3) == doctest::Approx(std::log(11.0)).epsilon(1e-12));
  const std::vector<double> half = {0.5, 0.5};
  CHECK(CrossEntropyLoss<double>(half, 1) == doctest::Approx(std::numbers::ln2).epsilon(1e-12));
  const std::vector<double> onehot = {0.0, 1.0, 0.0};
  CHECK(CrossEntropyLoss<double>(onehot, 1) == 0.0);
  CHECK(CrossEntropyLoss<double>(onehot, 0) == doctest::Approx(-std::log(1e-12)));
  CHECK_THROWS_AS(CrossEntropyLoss<double>(onehot, 3), Error);
  CHECK_THROWS_AS(CrossEntropyLoss<double>(onehot, -1), Error);
}

TEST_CASE("cross-entropy is nonnegative and finite for random posteriors") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> p(5);
    double s = 0;
    for (double& v : p) s += (v = u(rng) * u(rng) * u(rng));
    for (double& v : p) v /= s;
    const double l = CrossEntropyLoss<double>(p, t % 5);
    CHECK(l >= 0.0);
    CHECK(std::isfinite(l));
  }
}

TEST_CASE("train config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.learning_rate = -1;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.beta1 = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  const auto model = BuildModel<float>(SmallModelConfig(2), 1);
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.threads = 1;
  auto state = MakeTrainState(model, cfg);
  const auto batch = TwoClassChunks(4, 1);
  TrainStep(batch, state, cfg);
  CHECK(Flatten(state.model) == Flatten(model));
}

TEST_CASE("zero-gradient Adam step leaves parameters unchanged") {
  auto model = BuildModel<float>(SmallModelConfig(2), 2);
  const auto before = Flatten(model);
  AdamOptimizer opt(1e-2, 0.9, 0.999, 1e-8);
  const auto zero = ZeroGradients(model);
  for (int k = 0; k < 3; ++k) opt.Step(model, zero);
  CHECK(Flatten(model) == before);
  CHECK(opt.steps() == 3);
}

TEST_CASE("first Adam step moves each parameter by about lr against its gradient sign") {
  auto model = BuildModel<float>(SmallModelConfig(2), 3);
  auto grads = ZeroGradients(model);
  auto gv = ParameterViews(grads);
  for (auto& v : gv) {
    for (std::size_t i = 0; i < v.values.size(); ++i) v.values[i] = (i % 2 ? 0.3f : -2.0f);
  }
  const auto before = Flatten(model);
  AdamOptimizer opt(1e-3, 0.9, 0.999, 1e-8);
  opt.Step(model, grads);
  const auto after = Flatten(model);
  const auto g = Flatten(grads);
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(after[i] - before[i] == doctest::Approx(g[i] > 0 ? -1e-3 : 1e-3).epsilon(1e-3));
  }
}

TEST_CASE("a step keeps frontend parameters inside the clamp bounds") {
  auto model = BuildModel<float>(SmallModelConfig(2), 4);
  auto& fe = model.frontend;
  fe.pcen.r[0] = 0.05f;
  fe.pcen.alpha[1] = 0.0f;
  fe.pcen.delta[2] = 1e-6f;
  fe.gabor.sigma_t[3] = 0.5f;
  fe.pooling.sigma_p[4] = 0.5f;
  fe.gabor.mu[5] = 1.0f / 400.0f;
  TrainConfig cfg;
  cfg.learning_rate = 0.5;
  cfg.threads = 1;
  auto state = MakeTrainState(model, cfg);
  const auto batch = TwoClassChunks(4, 4);
  for (int s = 0; s < 3; ++s) TrainStep(batch, state, cfg);
  const auto& f = state.model.frontend;
  for (std::size_t i = 0; i < f.n_filters(); ++i) {
    CHECK(f.gabor.mu[i] >= 1.0f / 400.0f);
    CHECK(f.gabor.mu[i] <= 0.5f - 1.0f / 400.0f);
    CHECK(f.gabor.sigma_t[i] >= 0.5f);
    CHECK(f.pooling.sigma_p[i] >= 0.5f);
    CHECK(f.pcen.alpha[i] >= 0.0f);
    CHECK(f.pcen.delta[i] >= 1e-6f);
    CHECK(f.pcen.r[i] >= 0.05f);
    CHECK(f.pcen.r[i] <= 1.0f);
  }
}

TEST_CASE("overfitting a two-class batch decreases the loss") {
  const auto model = BuildModel<float>(SmallModelConfig(2), 5);
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.threads = 1;
  auto state = MakeTrainState(model, cfg);
  const auto batch = TwoClassChunks(8, 5);
  std::vector<double> trace;
  for (int s = 0; s < 200; ++s) trace.push_back(TrainStep(batch, state, cfg).loss);
  for (std::size_t span = 0; span + 50 < trace.size(); span += 50) {
    CHECK(trace[span + 50] < trace[span]);
  }
  CHECK(trace.back() < 0.1 * trace.front());
  CHECK(EvaluateLoss(state.model, batch, 1).accuracy == 1.0);
}

TEST_CASE("empty batch and label out of range are configuration errors") {
  const auto model = BuildModel<float>(SmallModelConfig(2), 6);
  TrainConfig cfg;
  auto state = MakeTrainState(model, cfg);
  std::vector<LabeledChunk> empty;
  CHECK_THROWS_AS(TrainStep(empty, state, cfg), Error);
  auto bad = TwoClassChunks(2, 6);
  bad[0].samples.resize(10);
  try {
    TrainStep(bad, state, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfiguration);
  }
}

TEST_CASE("non-finite input is a domain error") {
  const auto model = BuildModel<float>(SmallModelConfig(2), 7);
  TrainConfig cfg;
  cfg.threads = 1;
  auto state = MakeTrainState(model, cfg);
  auto batch = TwoClassChunks(2, 7);
  batch[1].samples[17] = std::numeric_limits<float>::infinity();
  try {
    TrainStep(batch, state, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDomain);
  }
}

TEST_CASE("non-finite loss names the offending parameter") {
  auto model = BuildModel<float>(SmallModelConfig(2), 7);
  model.classifier.hidden_weight.data[0] = std::numeric_limits<float>::quiet_NaN();
  TrainConfig cfg;
  cfg.threads = 1;
  auto state = MakeTrainState(model, cfg);
  const auto batch = TwoClassChunks(2, 7);
  try {
    TrainStep(batch, state, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNumeric);
    const std::string msg = e.what();
    CHECK(msg.find("batch item 0") != std::string::npos);
    CHECK(msg.find("hidden.weight") != std::string::npos);
  }
}

TEST_CASE("training loop is deterministic and independent of thread count") {
  const auto model = BuildModel<float>(SmallModelConfig(2), 8);
  const auto train = TwoClassChunks(24, 8);
  const auto val = TwoClassChunks(8, 9);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 8;
  cfg.seed = 3;
  cfg.threads = 1;
  const auto a = TrainLoop(train, val, model, cfg);
  const auto b = TrainLoop(train, val, model, cfg);
  cfg.threads = 3;
  const auto c = TrainLoop(train, val, model, cfg);
  CHECK(a.loss_trace == b.loss_trace);
  CHECK(a.loss_trace == c.loss_trace);
  CHECK(Flatten(a.best) == Flatten(c.best));
  cfg.seed = 4;
  const auto d = TrainLoop(train, val, model, cfg);
  CHECK(a.loss_trace != d.loss_trace);
}

TEST_CASE("history, step budget and patience") {
  const auto model = BuildModel<float>(SmallModelConfig(2), 10);
  const auto train = TwoClassChunks(16, 10);
  const auto val = TwoClassChunks(4, 11);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 4;
  cfg.threads = 1;
  auto r = TrainLoop(train, val, model, cfg);
  REQUIRE(r.history.size() == 1);
  CHECK(r.history[0].epoch == 1);
  CHECK(r.loss_trace.size() == 4);
  CHECK(r.best_val_accuracy == r.history[0].val_accuracy);

  cfg.epochs = 5;
  cfg.max_steps = 6;
  r = TrainLoop(train, val, model, cfg);
  CHECK(r.loss_trace.size() == 6);
  CHECK(r.history.size() == 2);

  // lr 0: validation accuracy never improves after epoch 1.
  cfg.max_steps.reset();
  cfg.learning_rate = 0.0;
  cfg.patience = 0;
  r = TrainLoop(train, val, model, cfg);
  CHECK(r.history.size() == 2);
  cfg.patience = 2;
  r = TrainLoop(train, val, model, cfg);
  CHECK(r.history.size() == 4);

  std::vector<LabeledChunk> none;
  CHECK_THROWS_AS(TrainLoop(none, val, model, cfg), Error);
  CHECK_THROWS_AS(TrainLoop(train, none, model, cfg), Error);
}

TEST_CASE("epoch record serializes to one JSON line") {
  EpochRecord r{3, 1.5, 1.25, 0.5, 2.0};
  const auto line = ToJsonLine(r);
  CHECK(line.find('\n') == std::string::npos);
  CHECK(line.find("\"epoch\":3") != std::string::npos);
  CHECK(line.find("\"val_accuracy\":0.5") != std::string::npos);
}

TEST_CASE("gradient check passes on seeded cases") {
  for (std::uint64_t seed = 0; seed < 2; ++seed) {
    const auto c = MakeGradCheckCase(seed);
    const auto report = GradCheck(c.model, c.chunk, c.label);
    INFO(report.ToTable());
    CHECK(report.all_pass());
    CHECK(report.tensors.size() == 16);
    for (const auto& t : report.tensors) CHECK(t.checked > 0);
  }
}

TEST_CASE("gradient check detects a corrupted gradient") {
  const auto c = MakeGradCheckCase(1);
  GradCheckOptions opt;
  opt.corrupt_tensor = "frontend.sigma_p";
  const auto report = GradCheck(c.model, c.chunk, c.label, opt);
  CHECK_FALSE(report.all_pass());
  for (const auto& t : report.tensors) {
    CHECK((t.status == CheckStatus::kFail) == (t.name == "frontend.sigma_p"));
  }
}

TEST_CASE("zeroed output layer makes upstream tensors degenerate") {
  auto c = MakeGradCheckCase(2);
  auto& w = c.model.classifier.out_weight.data;
  std::fill(w.begin(), w.end(), 0.0);
  const auto report = GradCheck(c.model, c.chunk, c.label);
  CHECK(report.all_pass());
  for (const auto& t : report.tensors) {
    if (t.name.starts_with("frontend.") || t.name.starts_with("conv")) {
      CHECK(t.status == CheckStatus::kDegenerate);
    }
  }
}
