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

#include "srccount/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "srccount/error.hpp"

namespace srccount {
namespace {

template <typename T>
Activation3<T> MakeAct(std::size_t c, std::size_t h, std::size_t w) {
  return {c, h, w, std::vector<T>(c * h * w, T(0))};
}

template <typename T>
Activation3<T> Conv2dSame(const Activation3<T>& in, const Tensor<T>& weight, const Tensor<T>& bias) {
  const std::size_t oc = weight.shape[0], kh = weight.shape[2], kw = weight.shape[3];
  const auto ph = static_cast<std::ptrdiff_t>(kh / 2), pw = static_cast<std::ptrdiff_t>(kw / 2);
  const auto sh = static_cast<std::ptrdiff_t>(in.h), sw = static_cast<std::ptrdiff_t>(in.w);
  auto out = MakeAct<T>(oc, in.h, in.w);
  for (std::size_t o = 0; o < oc; ++o) {
    T* dst = out.v.data() + o * in.h * in.w;
    std::fill(dst, dst + in.h * in.w, bias.data[o]);
    for (std::size_t c = 0; c < in.c; ++c) {
      const T* src = in.v.data() + c * in.h * in.w;
      const T* wk = weight.data.data() + ((o * in.c + c) * kh) * kw;
      for (std::ptrdiff_t ky = 0; ky < static_cast<std::ptrdiff_t>(kh); ++ky) {
        for (std::ptrdiff_t kx = 0; kx < static_cast<std::ptrdiff_t>(kw); ++kx) {
          const T wv = wk[ky * static_cast<std::ptrdiff_t>(kw) + kx];
          for (std::ptrdiff_t y = 0; y < sh; ++y) {
            const std::ptrdiff_t iy = y + ky - ph;
            if (iy < 0 || iy >= sh) continue;
            for (std::ptrdiff_t x = 0; x < sw; ++x) {
              const std::ptrdiff_t ix = x + kx - pw;
              if (ix < 0 || ix >= sw) continue;
              dst[y * sw + x] += wv * src[iy * sw + ix];
            }
          }
        }
      }
    }
  }
  return out;
}

template <typename T>
void Conv2dSameBackward(const Activation3<T>& in, const Tensor<T>& weight,
                        const Activation3<T>& g_out, Tensor<T>& g_weight, Tensor<T>& g_bias,
                        Activation3<T>& g_in) {
  const std::size_t oc = weight.shape[0], kh = weight.shape[2], kw = weight.shape[3];
  const auto ph = static_cast<std::ptrdiff_t>(kh / 2), pw = static_cast<std::ptrdiff_t>(kw / 2);
  const auto sh = static_cast<std::ptrdiff_t>(in.h), sw = static_cast<std::ptrdiff_t>(in.w);
  g_in = MakeAct<T>(in.c, in.h, in.w);
  for (std::size_t o = 0; o < oc; ++o) {
    const T* go = g_out.v.data() + o * in.h * in.w;
    T bsum = 0;
    for (std::size_t k = 0; k < in.h * in.w; ++k) bsum += go[k];
    g_bias.data[o] += bsum;
    for (std::size_t c = 0; c < in.c; ++c) {
      const T* src = in.v.data() + c * in.h * in.w;
      T* gsrc = g_in.v.data() + c * in.h * in.w;
      const std::size_t wbase = ((o * in.c + c) * kh) * kw;
      for (std::ptrdiff_t ky = 0; ky < static_cast<std::ptrdiff_t>(kh); ++ky) {
        for (std::ptrdiff_t kx = 0; kx < static_cast<std::ptrdiff_t>(kw); ++kx) {
          const std::size_t widx = wbase + static_cast<std::size_t>(ky) * kw + static_cast<std::size_t>(kx);
          const T wv = weight.data[widx];
          T gw = 0;
          for (std::ptrdiff_t y = 0; y < sh; ++y) {
            const std::ptrdiff_t iy = y + ky - ph;
            if (iy < 0 || iy >= sh) continue;
            for (std::ptrdiff_t x = 0; x < sw; ++x) {
              const std::ptrdiff_t ix = x + kx - pw;
              if (ix < 0 || ix >= sw) continue;
              gw += go[y * sw + x] * src[iy * sw + ix];
              gsrc[iy * sw + ix] += go[y * sw + x] * wv;
            }
          }
          g_weight.data[widx] += gw;
        }
      }
    }
  }
}

// Ceil-mode average pooling; edge windows average only their valid cells.
template <typename T>
Activation3<T> AvgPool(const Activation3<T>& in, std::size_t p) {
  const std::size_t oh = (in.h + p - 1) / p, ow = (in.w + p - 1) / p;
  auto out = MakeAct<T>(in.c, oh, ow);
  for (std::size_t c = 0; c < in.c; ++c) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        const std::size_t y1 = std::min(in.h, (y + 1) * p), x1 = std::min(in.w, (x + 1) * p);
        T acc = 0;
        for (std::size_t iy = y * p; iy < y1; ++iy) {
          for (std::size_t ix = x * p; ix < x1; ++ix) acc += in.v[(c * in.h + iy) * in.w + ix];
        }
        out.v[(c * oh + y) * ow + x] = acc / static_cast<T>((y1 - y * p) * (x1 - x * p));
      }
    }
  }
  return out;
}

template <typename T>
Activation3<T> AvgPoolBackward(const Activation3<T>& in_shape, const Activation3<T>& g_out,
                               std::size_t p) {
  auto g_in = MakeAct<T>(in_shape.c, in_shape.h, in_shape.w);
  for (std::size_t c = 0; c < g_out.c; ++c) {
    for (std::size_t y = 0; y < g_out.h; ++y) {
      for (std::size_t x = 0; x < g_out.w; ++x) {
        const std::size_t y1 = std::min(in_shape.h, (y + 1) * p), x1 = std::min(in_shape.w, (x + 1) * p);
        const T g = g_out.v[(c * g_out.h + y) * g_out.w + x] /
                    static_cast<T>((y1 - y * p) * (x1 - x * p));
        for (std::size_t iy = y * p; iy < y1; ++iy) {
          for (std::size_t ix = x * p; ix < x1; ++ix) g_in.v[(c * in_shape.h + iy) * in_shape.w + ix] += g;
        }
      }
    }
  }
  return g_in;
}

template <typename T>
void CheckFinite(std::span<const T> v, const char* what) {
  for (T e : v) {
    if (!std::isfinite(e)) throw Error(ErrorKind::kNumeric, std::string("non-finite ") + what);
  }
}

}  // namespace

void CompactCnnConfig::validate() const {
  if (n_classes < 2) {
    throw Error(ErrorKind::kConfiguration,
                "classifier needs at least 2 classes, got " + std::to_string(n_classes));
  }
  if (conv_blocks.empty()) throw Error(ErrorKind::kConfiguration, "classifier needs a conv block");
  if (hidden_dim == 0) throw Error(ErrorKind::kConfiguration, "hidden_dim must be positive");
  for (const auto& b : conv_blocks) {
    if (b.out_channels == 0 || b.stride == 0 || b.kernel_h % 2 == 0 || b.kernel_w % 2 == 0) {
      throw Error(ErrorKind::kConfiguration,
                  "conv blocks need positive channels and stride and odd kernel extents");
    }
  }
}

template <std::floating_point T>
Tensor<T>::Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  data.assign(n, T(0));
}

template <std::floating_point T>
ClassifierParams<T> InitClassifier(const CompactCnnConfig& config, std::size_t input_h,
                                   std::size_t input_w, std::uint64_t seed) {
  config.validate();
  if (input_h == 0 || input_w == 0) {
    throw Error(ErrorKind::kConfiguration, "classifier input shape must be nonempty");
  }
  std::mt19937_64 rng(seed);
  ClassifierParams<T> p;
  p.config = config;
  p.input_h = input_h;
  p.input_w = input_w;
  std::size_t in_c = 1;
  for (const auto& b : config.conv_blocks) {
    Tensor<T> w({b.out_channels, in_c, b.kernel_h, b.kernel_w});
    std::normal_distribution<double> he(0.0, std::sqrt(2.0 / static_cast<double>(in_c * b.kernel_h * b.kernel_w)));
    for (T& v : w.data) v = static_cast<T>(he(rng));
    p.conv_weight.push_back(std::move(w));
    p.conv_bias.emplace_back(std::vector<std::size_t>{b.out_channels});
    in_c = b.out_channels;
  }
  p.hidden_weight = Tensor<T>({config.hidden_dim, in_c});
  std::normal_distribution<double> he_h(0.0, std::sqrt(2.0 / static_cast<double>(in_c)));
  for (T& v : p.hidden_weight.data) v = static_cast<T>(he_h(rng));
  p.hidden_bias = Tensor<T>({config.hidden_dim});
  p.out_weight = Tensor<T>({config.n_classes, config.hidden_dim});
  const double limit = std::sqrt(6.0 / static_cast<double>(config.hidden_dim + config.n_classes));
  std::uniform_real_distribution<double> xavier(-limit, limit);
  for (T& v : p.out_weight.data) v = static_cast<T>(xavier(rng));
  p.out_bias = Tensor<T>({config.n_classes});
  return p;
}

template <std::floating_point T>
ClassifierParams<T> ZerosLike(const ClassifierParams<T>& like) {
  ClassifierParams<T> z = like;
  auto zero = [](Tensor<T>& t) { std::fill(t.data.begin(), t.data.end(), T(0)); };
  for (auto& t : z.conv_weight) zero(t);
  for (auto& t : z.conv_bias) zero(t);
  zero(z.hidden_weight);
  zero(z.hidden_bias);
  zero(z.out_weight);
  zero(z.out_bias);
  return z;
}

template <std::floating_point T>
std::vector<T> Softmax(std::span<const T> logits) {
  std::vector<T> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const T mx = *std::max_element(p.begin(), p.end());
  T sum = 0;
  for (T& v : p) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (T& v : p) v /= sum;
  return p;
}

template <std::floating_point T>
int Predict(std::span<const T> probs) {
  if (probs.empty()) throw Error(ErrorKind::kValidation, "empty posterior");
  // max_element returns the first maximum.
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

template <std::floating_point T>
std::vector<T> ClassifierLogits(const FeatureMap<T>& features, const ClassifierParams<T>& params,
                                ClassifierCache<T>* cache) {
  if (features.channels != params.input_h || features.frames != params.input_w) {
    throw Error(ErrorKind::kConfiguration,
                "classifier expects a " + std::to_string(params.input_h) + "x" +
                    std::to_string(params.input_w) + " feature map, got " +
                    std::to_string(features.channels) + "x" + std::to_string(features.frames));
  }
  ClassifierCache<T> local;
  ClassifierCache<T>& c = cache ? *cache : local;
  c.block_input.clear();
  c.pre_act.clear();
  c.post_act.clear();

  Activation3<T> x{1, features.channels, features.frames, features.values};
  for (std::size_t b = 0; b < params.conv_weight.size(); ++b) {
    c.block_input.push_back(x);
    auto pre = Conv2dSame(x, params.conv_weight[b], params.conv_bias[b]);
    auto post = pre;
    for (T& v : post.v) v = std::max(v, T(0));
    c.pre_act.push_back(std::move(pre));
    const std::size_t stride = params.config.conv_blocks[b].stride;
    x = stride > 1 ? AvgPool(post, stride) : post;
    c.post_act.push_back(std::move(post));
  }
  c.last = x;

  const std::size_t ch = x.c, area = x.h * x.w;
  c.pooled.assign(ch, T(0));
  for (std::size_t k = 0; k < ch; ++k) {
    T acc = 0;
    for (std::size_t j = 0; j < area; ++j) acc += x.v[k * area + j];
    c.pooled[k] = acc / static_cast<T>(area);
  }

  const std::size_t hd = params.config.hidden_dim;
  c.hidden_pre.assign(hd, T(0));
  c.hidden.assign(hd, T(0));
  for (std::size_t h = 0; h < hd; ++h) {
    T acc = params.hidden_bias.data[h];
    for (std::size_t k = 0; k < ch; ++k) acc += params.hidden_weight.data[h * ch + k] * c.pooled[k];
    c.hidden_pre[h] = acc;
    c.hidden[h] = std::max(acc, T(0));
  }

  const std::size_t nc = params.config.n_classes;
  c.logits.assign(nc, T(0));
  for (std::size_t o = 0; o < nc; ++o) {
    T acc = params.out_bias.data[o];
    for (std::size_t h = 0; h < hd; ++h) acc += params.out_weight.data[o * hd + h] * c.hidden[h];
    c.logits[o] = acc;
  }
  return c.logits;
}

template <std::floating_point T>
Posterior<T> ClassifierForward(const FeatureMap<T>& features, const ClassifierParams<T>& params) {
  const auto logits = ClassifierLogits(features, params);
  return {Softmax(std::span<const T>(logits))};
}

template <std::floating_point T>
ClassifierGradients<T> ClassifierBackward(const ClassifierParams<T>& params,
                                          const ClassifierCache<T>& cache,
                                          std::span<const T> logits_grad) {
  const std::size_t nc = params.config.n_classes, hd = params.config.hidden_dim;
  if (logits_grad.size() != nc) {
    throw Error(ErrorKind::kShapeMismatch, "logit gradient has " + std::to_string(logits_grad.size()) +
                                               " entries, expected " + std::to_string(nc));
  }
  CheckFinite(logits_grad, "logit gradient");

  ClassifierGradients<T> g{ZerosLike(params), FeatureMap<T>(params.input_h, params.input_w)};
  auto& gp = g.params;

  std::vector<T> g_hidden(hd, T(0));
  for (std::size_t o = 0; o < nc; ++o) {
    const T go = logits_grad[o];
    gp.out_bias.data[o] += go;
    for (std::size_t h = 0; h < hd; ++h) {
      gp.out_weight.data[o * hd + h] += go * cache.hidden[h];
      g_hidden[h] += go * params.out_weight.data[o * hd + h];
    }
  }

  const std::size_t ch = cache.pooled.size();
  std::vector<T> g_pooled(ch, T(0));
  for (std::size_t h = 0; h < hd; ++h) {
    const T gh = cache.hidden_pre[h] > T(0) ? g_hidden[h] : T(0);
    gp.hidden_bias.data[h] += gh;
    for (std::size_t k = 0; k < ch; ++k) {
      gp.hidden_weight.data[h * ch + k] += gh * cache.pooled[k];
      g_pooled[k] += gh * params.hidden_weight.data[h * ch + k];
    }
  }

  Activation3<T> gx = MakeAct<T>(cache.last.c, cache.last.h, cache.last.w);
  const std::size_t area = gx.h * gx.w;
  for (std::size_t k = 0; k < ch; ++k) {
    for (std::size_t j = 0; j < area; ++j) gx.v[k * area + j] = g_pooled[k] / static_cast<T>(area);
  }

  for (std::size_t b = params.conv_weight.size(); b-- > 0;) {
    const std::size_t stride = params.config.conv_blocks[b].stride;
    Activation3<T> g_post = stride > 1 ? AvgPoolBackward(cache.post_act[b], gx, stride) : gx;
    const auto& pre = cache.pre_act[b];
    for (std::size_t k = 0; k < g_post.v.size(); ++k) {
      if (!(pre.v[k] > T(0))) g_post.v[k] = T(0);
    }
    Activation3<T> g_in;
    Conv2dSameBackward(cache.block_input[b], params.conv_weight[b], g_post, gp.conv_weight[b],
                       gp.conv_bias[b], g_in);
    gx = std::move(g_in);
  }
  g.input.values = std::move(gx.v);
  return g;
}

template <std::floating_point T>
ClassifierGradients<T> ComputeClassifierGradients(const FeatureMap<T>& features,
                                                  const ClassifierParams<T>& params,
                                                  std::span<const T> probs_grad) {
  CheckFinite(std::span<const T>(features.values), "classifier input");
  CheckFinite(probs_grad, "upstream gradient");
  ClassifierCache<T> cache;
  const auto logits = ClassifierLogits(features, params, &cache);
  const auto p = Softmax(std::span<const T>(logits));
  if (probs_grad.size() != p.size()) {
    throw Error(ErrorKind::kShapeMismatch, "posterior gradient has " +
                                               std::to_string(probs_grad.size()) +
                                               " entries, expected " + std::to_string(p.size()));
  }
  // dz_k = p_k (g_k - sum_j p_j g_j)
  T dot = 0;
  for (std::size_t k = 0; k < p.size(); ++k) dot += p[k] * probs_grad[k];
  std::vector<T> dz(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) dz[k] = p[k] * (probs_grad[k] - dot);
  return ClassifierBackward(params, cache, std::span<const T>(dz));
}

template <std::floating_point T>
std::vector<std::uint8_t> RectifierPattern(const ClassifierCache<T>& cache) {
  std::vector<std::uint8_t> bits;
  for (const auto& a : cache.pre_act) {
    for (T v : a.v) bits.push_back(v > T(0) ? 1 : 0);
  }
  for (T v : cache.hidden_pre) bits.push_back(v > T(0) ? 1 : 0);
  return bits;
}

#define SRCCOUNT_INSTANTIATE_CLASSIFIER(T)                                                      \
  template struct Tensor<T>;                                                                    \
  template ClassifierParams<T> InitClassifier<T>(const CompactCnnConfig&, std::size_t,          \
                                                 std::size_t, std::uint64_t);                   \
  template ClassifierParams<T> ZerosLike<T>(const ClassifierParams<T>&);                        \
  template std::vector<T> Softmax<T>(std::span<const T>);                                       \
  template int Predict<T>(std::span<const T>);                                                  \
  template std::vector<T> ClassifierLogits<T>(const FeatureMap<T>&, const ClassifierParams<T>&, \
                                              ClassifierCache<T>*);                             \
  template Posterior<T> ClassifierForward<T>(const FeatureMap<T>&, const ClassifierParams<T>&); \
  template ClassifierGradients<T> ClassifierBackward<T>(                                        \
      const ClassifierParams<T>&, const ClassifierCache<T>&, std::span<const T>);               \
  template ClassifierGradients<T> ComputeClassifierGradients<T>(                                \
      const FeatureMap<T>&, const ClassifierParams<T>&, std::span<const T>);                    \
  template std::vector<std::uint8_t> RectifierPattern<T>(const ClassifierCache<T>&);

SRCCOUNT_INSTANTIATE_CLASSIFIER(float)
SRCCOUNT_INSTANTIATE_CLASSIFIER(double)

#undef SRCCOUNT_INSTANTIATE_CLASSIFIER

}  // namespace srccount
