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

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "srccount/classifier.hpp"
#include "srccount/frontend.hpp"
#include "srccount/signal.hpp"

namespace srccount {

struct ModelConfig {
  WindowConfig window;
  std::size_t n_filters = 40;
  std::size_t kernel_width = 401;
  double f_min_hz = 60.0;
  double f_max_hz = 7800.0;
  std::size_t pool_stride = 160;
  std::size_t pool_kernel_width = 161;
  double pool_sigma = 40.0;
  CompactCnnConfig classifier;
};

// Frontend and classifier bound to the window they were built for.
template <std::floating_point T>
struct Model {
  WindowConfig window;
  FrontendParams<T> frontend;
  ClassifierParams<T> classifier;

  std::size_t chunk_length() const { return window.length(); }
  std::size_t n_classes() const { return classifier.n_classes(); }
};

template <std::floating_point T>
Model<T> BuildModel(const ModelConfig& config, std::uint64_t seed);

template <std::floating_point To, std::floating_point From>
Model<To> CastModel(const Model<From>& model);

// Same layout as `like`, all learnable entries zero.
template <std::floating_point T>
Model<T> ZeroGradients(const Model<T>& like);

template <typename V>
struct ParamView {
  std::string name;
  std::span<V> values;
  std::vector<std::size_t> shape;
};

// Every learnable tensor in a fixed order: frontend.{mu,sigma_t,sigma_p,alpha,
// delta,r}, conv<k>.{weight,bias}, hidden.{weight,bias}, out.{weight,bias}.
template <std::floating_point T>
std::vector<ParamView<T>> ParameterViews(Model<T>& model);
template <std::floating_point T>
std::vector<ParamView<const T>> ParameterViews(const Model<T>& model);

template <std::floating_point T>
void AddInPlace(Model<T>& acc, const Model<T>& other);
template <std::floating_point T>
void ScaleInPlace(Model<T>& acc, T factor);

// Cross-entropy -log(max(p[label], 1e-12)). Throws kValidation for a bad label.
template <std::floating_point T>
T CrossEntropyLoss(std::span<const T> probs, int label);

template <std::floating_point T>
struct ChunkEval {
  T loss = 0;
  int predicted = 0;
  std::vector<T> probs;
};

// Full pipeline on one chunk, inference only.
template <std::floating_point T>
ChunkEval<T> EvaluateChunk(const Model<T>& model, std::span<const T> chunk, int label);

template <std::floating_point T>
std::vector<T> PredictProbs(const Model<T>& model, std::span<const T> chunk);

// Loss on one chunk and its gradient for every parameter, written to `grads`
// (overwritten, same layout as the model). Optionally returns the rectifier
// pattern of the forward pass.
template <std::floating_point T>
ChunkEval<T> LossAndGradients(const Model<T>& model, std::span<const T> chunk, int label,
                              Model<T>& grads, std::vector<std::uint8_t>* pattern = nullptr);

// Loss only, with optional rectifier pattern; used by finite differences.
template <std::floating_point T>
T LossOnly(const Model<T>& model, std::span<const T> chunk, int label,
           std::vector<std::uint8_t>* pattern = nullptr);

}  // namespace srccount
