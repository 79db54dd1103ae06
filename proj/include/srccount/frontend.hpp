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

#include <complex>
#include <concepts>
#include <cstddef>
#include <span>
#include <vector>

namespace srccount {

// Channel-major N x M matrix. Also used for the full-rate N x L filter output.
template <std::floating_point T>
struct FeatureMap {
  std::size_t channels = 0;
  std::size_t frames = 0;
  std::vector<T> values;

  FeatureMap() = default;
  FeatureMap(std::size_t n, std::size_t m, T fill = T(0))
      : channels(n), frames(m), values(n * m, fill) {}

  T& at(std::size_t i, std::size_t m) { return values[i * frames + m]; }
  const T& at(std::size_t i, std::size_t m) const { return values[i * frames + m]; }
  std::span<T> row(std::size_t i) { return {values.data() + i * frames, frames}; }
  std::span<const T> row(std::size_t i) const { return {values.data() + i * frames, frames}; }
};

template <std::floating_point T>
struct GaborFilterParams {
  std::vector<T> mu;       // center frequency, cycles/sample, in (0, 0.5)
  std::vector<T> sigma_t;  // envelope width, samples
};

template <std::floating_point T>
struct PoolingParams {
  std::vector<T> sigma_p;  // Gaussian low-pass width, samples
  std::size_t stride = 160;
  std::size_t kernel_width = 161;
};

template <std::floating_point T>
struct PcenParams {
  std::vector<T> alpha;
  std::vector<T> delta;
  std::vector<T> r;
  T s = T(0.04);  // smoother coefficient, fixed
  T eps = T(1e-6);
};

template <std::floating_point T>
struct FrontendParams {
  GaborFilterParams<T> gabor;
  PoolingParams<T> pooling;
  PcenParams<T> pcen;
  std::size_t kernel_width = 401;

  std::size_t n_filters() const { return gabor.mu.size(); }
  // Number of pooled frames for a chunk of `chunk_len` samples.
  std::size_t frames_for(std::size_t chunk_len) const;
  // Throws kParameter if any vector length or kernel width is inconsistent.
  void validate() const;
};

template <std::floating_point T>
struct FrontendGradients {
  std::vector<T> mu, sigma_t, sigma_p, alpha, delta, r;
};

// Lower bounds maintained after every optimizer step.
struct FrontendClampRules {
  double sigma_floor = 0.5;
  double r_min = 0.05;
  double r_max = 1.0;
  double delta_floor = 1e-6;
  double alpha_floor = 0.0;
};

// exp(j 2 pi mu n) / (sqrt(2 pi) sigma) * exp(-n^2 / (2 sigma^2)) for
// n = -(W-1)/2 .. (W-1)/2.
template <std::floating_point T>
std::vector<std::complex<T>> GaborKernel(T mu, T sigma, std::size_t width);

// Sampled Gaussian, before renormalization to unit sum.
template <std::floating_point T>
std::vector<T> GaussianKernel(T sigma, std::size_t width);

// GaussianKernel renormalized so its taps sum to one.
template <std::floating_point T>
std::vector<T> PoolingKernel(T sigma, std::size_t width);

// |x * h_i|^2 with zero padding of (W-1)/2 per side; output is N x L.
template <std::floating_point T>
FeatureMap<T> FilterStage(std::span<const T> x, const GaborFilterParams<T>& params,
                          std::size_t kernel_width);

// Per-channel Gaussian low-pass, sampled every `stride` samples; N x ceil(L/stride).
template <std::floating_point T>
FeatureMap<T> PoolingStage(const FeatureMap<T>& y1, const PoolingParams<T>& params);

// Per-channel energy normalization with smoother y*[0] = y[0]. Throws kDomain on
// negative input.
template <std::floating_point T>
FeatureMap<T> PcenStage(const FeatureMap<T>& y2, const PcenParams<T>& params);

// Intermediate values retained for the backward pass.
template <std::floating_point T>
struct FrontendCache {
  std::vector<T> input;
  std::vector<T> kernel_re, kernel_im;  // N x W, stored time-reversed
  std::vector<T> pool_kernels;          // N x W_p, unit sum
  std::vector<T> z_re, z_im;            // N x L complex filter output
  FeatureMap<T> y1, y2, smooth;
};

template <std::floating_point T>
FeatureMap<T> FrontendForward(std::span<const T> x, const FrontendParams<T>& params,
                              FrontendCache<T>* cache = nullptr);

// Gradients of sum(upstream .* FrontendForward(x)) for every learnable tensor.
// Requires a cache populated by FrontendForward on the same x and params.
template <std::floating_point T>
FrontendGradients<T> FrontendBackward(const FrontendParams<T>& params,
                                      const FrontendCache<T>& cache,
                                      const FeatureMap<T>& upstream);

template <std::floating_point T>
FrontendGradients<T> ComputeFrontendGradients(std::span<const T> x,
                                              const FrontendParams<T>& params,
                                              const FeatureMap<T>& upstream);

// Mel-spaced centers between the band edges (exclusive), envelope widths whose
// frequency-domain FWHM matches the neighbor spacing, uniform pooling width.
template <std::floating_point T>
FrontendParams<T> InitMel(std::size_t n_filters, int sample_rate_hz, double f_min_hz,
                          double f_max_hz, std::size_t kernel_width,
                          double pooling_sigma = 40.0);

template <std::floating_point T>
void ClampFrontend(FrontendParams<T>& params, std::size_t chunk_len,
                   const FrontendClampRules& rules = {});

double HzToMel(double hz);
double MelToHz(double mel);

}  // namespace srccount
