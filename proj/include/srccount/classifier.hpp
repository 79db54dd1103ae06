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

#include "srccount/frontend.hpp"

namespace srccount {

struct ConvBlockConfig {
  std::size_t out_channels = 16;
  std::size_t kernel_h = 3;
  std::size_t kernel_w = 3;
  // Average-pooling factor applied after the rectifier when > 1.
  std::size_t stride = 1;

  friend bool operator==(const ConvBlockConfig&, const ConvBlockConfig&) = default;
};

struct CompactCnnConfig {
  std::vector<ConvBlockConfig> conv_blocks = {{16, 3, 3, 1}, {32, 3, 3, 2}, {64, 3, 3, 2}};
  std::size_t hidden_dim = 128;
  std::size_t n_classes = 11;

  void validate() const;
  friend bool operator==(const CompactCnnConfig&, const CompactCnnConfig&) = default;
};

template <std::floating_point T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s);
  std::size_t size() const { return data.size(); }
};

template <std::floating_point T>
struct ClassifierParams {
  CompactCnnConfig config;
  std::size_t input_h = 0;  // filter channels N
  std::size_t input_w = 0;  // frames M
  std::vector<Tensor<T>> conv_weight;  // [out, in, kh, kw]
  std::vector<Tensor<T>> conv_bias;    // [out]
  Tensor<T> hidden_weight;             // [hidden, last conv channels]
  Tensor<T> hidden_bias;
  Tensor<T> out_weight;                // [classes, hidden]
  Tensor<T> out_bias;

  std::size_t n_classes() const { return config.n_classes; }
};

template <std::floating_point T>
ClassifierParams<T> InitClassifier(const CompactCnnConfig& config, std::size_t input_h,
                                   std::size_t input_w, std::uint64_t seed);

// Same structure as `like`, every entry zero.
template <std::floating_point T>
ClassifierParams<T> ZerosLike(const ClassifierParams<T>& like);

template <std::floating_point T>
struct Posterior {
  std::vector<T> probs;
};

// Numerically stable softmax.
template <std::floating_point T>
std::vector<T> Softmax(std::span<const T> logits);

// Argmax with ties toward the smaller index.
template <std::floating_point T>
int Predict(std::span<const T> probs);

template <std::floating_point T>
int Predict(const Posterior<T>& posterior) {
  return Predict(std::span<const T>(posterior.probs));
}

template <std::floating_point T>
struct Activation3 {
  std::size_t c = 0, h = 0, w = 0;
  std::vector<T> v;
};

template <std::floating_point T>
struct ClassifierCache {
  std::vector<Activation3<T>> block_input;  // input of each conv block
  std::vector<Activation3<T>> pre_act;      // conv output before the rectifier
  std::vector<Activation3<T>> post_act;     // after the rectifier, before pooling
  Activation3<T> last;                      // output of the final block
  std::vector<T> pooled;                    // global average
  std::vector<T> hidden_pre, hidden;
  std::vector<T> logits;
};

template <std::floating_point T>
std::vector<T> ClassifierLogits(const FeatureMap<T>& features, const ClassifierParams<T>& params,
                                ClassifierCache<T>* cache = nullptr);

template <std::floating_point T>
Posterior<T> ClassifierForward(const FeatureMap<T>& features, const ClassifierParams<T>& params);

template <std::floating_point T>
struct ClassifierGradients {
  ClassifierParams<T> params;  // gradient per tensor, same layout as the parameters
  FeatureMap<T> input;         // dC / d features
};

// Backward pass from dC/dlogits.
template <std::floating_point T>
ClassifierGradients<T> ClassifierBackward(const ClassifierParams<T>& params,
                                          const ClassifierCache<T>& cache,
                                          std::span<const T> logits_grad);

// Backward pass from dC/dprobs (through the softmax).
template <std::floating_point T>
ClassifierGradients<T> ComputeClassifierGradients(const FeatureMap<T>& features,
                                                  const ClassifierParams<T>& params,
                                                  std::span<const T> probs_grad);

// Sign pattern of every rectifier input; differs between two evaluations
// exactly when some unit crossed its kink.
template <std::floating_point T>
std::vector<std::uint8_t> RectifierPattern(const ClassifierCache<T>& cache);

}  // namespace srccount
