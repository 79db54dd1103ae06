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

#include "srccount/model.hpp"

#include <algorithm>
#include <cmath>

#include "srccount/error.hpp"

namespace srccount {
namespace {

template <typename To, typename From>
std::vector<To> CastVec(const std::vector<From>& v) {
  return std::vector<To>(v.begin(), v.end());
}

template <typename To, typename From>
Tensor<To> CastTensor(const Tensor<From>& t) {
  Tensor<To> out;
  out.shape = t.shape;
  out.data = CastVec<To>(t.data);
  return out;
}

template <typename M, typename V>
std::vector<ParamView<V>> Views(M& model) {
  std::vector<ParamView<V>> views;
  const std::size_t n = model.frontend.n_filters();
  auto vec = [&](const char* name, auto& v) {
    views.push_back({name, std::span<V>(v.data(), v.size()), {n}});
  };
  vec("frontend.mu", model.frontend.gabor.mu);
  vec("frontend.sigma_t", model.frontend.gabor.sigma_t);
  vec("frontend.sigma_p", model.frontend.pooling.sigma_p);
  vec("frontend.alpha", model.frontend.pcen.alpha);
  vec("frontend.delta", model.frontend.pcen.delta);
  vec("frontend.r", model.frontend.pcen.r);
  auto ten = [&](std::string name, auto& t) {
    views.push_back({std::move(name), std::span<V>(t.data.data(), t.data.size()), t.shape});
  };
  auto& cls = model.classifier;
  for (std::size_t b = 0; b < cls.conv_weight.size(); ++b) {
    ten("conv" + std::to_string(b) + ".weight", cls.conv_weight[b]);
    ten("conv" + std::to_string(b) + ".bias", cls.conv_bias[b]);
  }
  ten("hidden.weight", cls.hidden_weight);
  ten("hidden.bias", cls.hidden_bias);
  ten("out.weight", cls.out_weight);
  ten("out.bias", cls.out_bias);
  return views;
}

template <typename T>
void CheckChunk(const Model<T>& model, std::span<const T> chunk) {
  if (chunk.size() != model.chunk_length()) {
    throw Error(ErrorKind::kConfiguration,
                "chunk has " + std::to_string(chunk.size()) + " samples, model expects " +
                    std::to_string(model.chunk_length()));
  }
}

}  // namespace

template <std::floating_point T>
Model<T> BuildModel(const ModelConfig& config, std::uint64_t seed) {
  Model<T> m;
  m.window = config.window;
  const std::size_t len = config.window.length();
  const double nyquist = config.window.sample_rate_hz / 2.0;
  m.frontend = InitMel<T>(config.n_filters, config.window.sample_rate_hz, config.f_min_hz,
                          std::min(config.f_max_hz, nyquist), config.kernel_width,
                          config.pool_sigma);
  m.frontend.pooling.stride = config.pool_stride;
  m.frontend.pooling.kernel_width = config.pool_kernel_width;
  m.frontend.validate();
  ClampFrontend(m.frontend, len);
  m.classifier = InitClassifier<T>(config.classifier, config.n_filters,
                                   m.frontend.frames_for(len), seed);
  return m;
}

template <std::floating_point To, std::floating_point From>
Model<To> CastModel(const Model<From>& model) {
  Model<To> out;
  out.window = model.window;
  const auto& f = model.frontend;
  auto& g = out.frontend;
  g.kernel_width = f.kernel_width;
  g.gabor.mu = CastVec<To>(f.gabor.mu);
  g.gabor.sigma_t = CastVec<To>(f.gabor.sigma_t);
  g.pooling.sigma_p = CastVec<To>(f.pooling.sigma_p);
  g.pooling.stride = f.pooling.stride;
  g.pooling.kernel_width = f.pooling.kernel_width;
  g.pcen.alpha = CastVec<To>(f.pcen.alpha);
  g.pcen.delta = CastVec<To>(f.pcen.delta);
  g.pcen.r = CastVec<To>(f.pcen.r);
  g.pcen.s = static_cast<To>(f.pcen.s);
  g.pcen.eps = static_cast<To>(f.pcen.eps);
  const auto& c = model.classifier;
  auto& d = out.classifier;
  d.config = c.config;
  d.input_h = c.input_h;
  d.input_w = c.input_w;
  for (const auto& t : c.conv_weight) d.conv_weight.push_back(CastTensor<To>(t));
  for (const auto& t : c.conv_bias) d.conv_bias.push_back(CastTensor<To>(t));
  d.hidden_weight = CastTensor<To>(c.hidden_weight);
  d.hidden_bias = CastTensor<To>(c.hidden_bias);
  d.out_weight = CastTensor<To>(c.out_weight);
  d.out_bias = CastTensor<To>(c.out_bias);
  return out;
}

template <std::floating_point T>
Model<T> ZeroGradients(const Model<T>& like) {
  Model<T> z = like;
  for (auto& v : ParameterViews(z)) std::fill(v.values.begin(), v.values.end(), T(0));
  return z;
}

template <std::floating_point T>
std::vector<ParamView<T>> ParameterViews(Model<T>& model) {
  return Views<Model<T>, T>(model);
}

template <std::floating_point T>
std::vector<ParamView<const T>> ParameterViews(const Model<T>& model) {
  return Views<const Model<T>, const T>(model);
}

template <std::floating_point T>
void AddInPlace(Model<T>& acc, const Model<T>& other) {
  auto a = ParameterViews(acc);
  const auto b = ParameterViews(other);
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t j = 0; j < a[k].values.size(); ++j) a[k].values[j] += b[k].values[j];
  }
}

template <std::floating_point T>
void ScaleInPlace(Model<T>& acc, T factor) {
  for (auto& v : ParameterViews(acc)) {
    for (T& e : v.values) e *= factor;
  }
}

template <std::floating_point T>
T CrossEntropyLoss(std::span<const T> probs, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= probs.size()) {
    throw Error(ErrorKind::kValidation, "label " + std::to_string(label) + " outside [0, " +
                                            std::to_string(static_cast<long>(probs.size()) - 1) +
                                            "]");
  }
  return -std::log(std::max(probs[static_cast<std::size_t>(label)], T(1e-12)));
}

template <std::floating_point T>
std::vector<T> PredictProbs(const Model<T>& model, std::span<const T> chunk) {
  CheckChunk(model, chunk);
  const auto features = FrontendForward(chunk, model.frontend);
  const auto logits = ClassifierLogits(features, model.classifier);
  return Softmax(std::span<const T>(logits));
}

template <std::floating_point T>
ChunkEval<T> EvaluateChunk(const Model<T>& model, std::span<const T> chunk, int label) {
  ChunkEval<T> r;
  r.probs = PredictProbs(model, chunk);
  r.loss = CrossEntropyLoss(std::span<const T>(r.probs), label);
  r.predicted = Predict(std::span<const T>(r.probs));
  return r;
}

template <std::floating_point T>
T LossOnly(const Model<T>& model, std::span<const T> chunk, int label,
           std::vector<std::uint8_t>* pattern) {
  CheckChunk(model, chunk);
  const auto features = FrontendForward(chunk, model.frontend);
  ClassifierCache<T> cache;
  const auto logits = ClassifierLogits(features, model.classifier, &cache);
  if (pattern) *pattern = RectifierPattern(cache);
  const auto probs = Softmax(std::span<const T>(logits));
  return CrossEntropyLoss(std::span<const T>(probs), label);
}

template <std::floating_point T>
ChunkEval<T> LossAndGradients(const Model<T>& model, std::span<const T> chunk, int label,
                              Model<T>& grads, std::vector<std::uint8_t>* pattern) {
  CheckChunk(model, chunk);
  FrontendCache<T> fcache;
  const auto features = FrontendForward(chunk, model.frontend, &fcache);
  ClassifierCache<T> ccache;
  const auto logits = ClassifierLogits(features, model.classifier, &ccache);
  if (pattern) *pattern = RectifierPattern(ccache);

  ChunkEval<T> r;
  r.probs = Softmax(std::span<const T>(logits));
  r.loss = CrossEntropyLoss(std::span<const T>(r.probs), label);
  r.predicted = Predict(std::span<const T>(r.probs));

  // d(-log p_label)/dz = p - onehot; zero once the probability floor is active.
  std::vector<T> dz(r.probs.size(), T(0));
  if (r.probs[static_cast<std::size_t>(label)] >= T(1e-12)) {
    dz = r.probs;
    dz[static_cast<std::size_t>(label)] -= T(1);
  }
  auto cg = ClassifierBackward(model.classifier, ccache, std::span<const T>(dz));
  auto fg = FrontendBackward(model.frontend, fcache, cg.input);

  grads.window = model.window;
  grads.classifier = std::move(cg.params);
  grads.frontend = model.frontend;
  grads.frontend.gabor.mu = std::move(fg.mu);
  grads.frontend.gabor.sigma_t = std::move(fg.sigma_t);
  grads.frontend.pooling.sigma_p = std::move(fg.sigma_p);
  grads.frontend.pcen.alpha = std::move(fg.alpha);
  grads.frontend.pcen.delta = std::move(fg.delta);
  grads.frontend.pcen.r = std::move(fg.r);
  return r;
}

#define SRCCOUNT_INSTANTIATE_MODEL(T)                                                         \
  template Model<T> BuildModel<T>(const ModelConfig&, std::uint64_t);                        \
  template Model<T> ZeroGradients<T>(const Model<T>&);                                       \
  template std::vector<ParamView<T>> ParameterViews<T>(Model<T>&);                           \
  template std::vector<ParamView<const T>> ParameterViews<T>(const Model<T>&);               \
  template void AddInPlace<T>(Model<T>&, const Model<T>&);                                   \
  template void ScaleInPlace<T>(Model<T>&, T);                                               \
  template T CrossEntropyLoss<T>(std::span<const T>, int);                                   \
  template std::vector<T> PredictProbs<T>(const Model<T>&, std::span<const T>);              \
  template ChunkEval<T> EvaluateChunk<T>(const Model<T>&, std::span<const T>, int);          \
  template T LossOnly<T>(const Model<T>&, std::span<const T>, int, std::vector<std::uint8_t>*); \
  template ChunkEval<T> LossAndGradients<T>(const Model<T>&, std::span<const T>, int,        \
                                            Model<T>&, std::vector<std::uint8_t>*);

SRCCOUNT_INSTANTIATE_MODEL(float)
SRCCOUNT_INSTANTIATE_MODEL(double)

template Model<double> CastModel<double, float>(const Model<float>&);
template Model<float> CastModel<float, double>(const Model<double>&);
template Model<float> CastModel<float, float>(const Model<float>&);
template Model<double> CastModel<double, double>(const Model<double>&);

#undef SRCCOUNT_INSTANTIATE_MODEL

}  // namespace srccount
