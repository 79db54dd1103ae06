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

#include "srccount/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "srccount/error.hpp"

namespace srccount {
namespace {

void CheckKernelArgs(double sigma, std::size_t width, const char* what) {
  if (width == 0 || width % 2 == 0) {
    throw Error(ErrorKind::kParameter,
                std::string(what) + " width must be odd and positive, got " + std::to_string(width));
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorKind::kParameter,
                std::string(what) + " sigma must be positive, got " + std::to_string(sigma));
  }
}

// x^r * ln(x), continuously extended to 0 at x = 0.
template <typename T>
T PowLog(T x, T r) {
  return x > T(0) ? std::pow(x, r) * std::log(x) : T(0);
}

template <typename T>
void PrepareKernels(const FrontendParams<T>& params, FrontendCache<T>& cache) {
  const std::size_t n = params.n_filters();
  const std::size_t w = params.kernel_width;
  cache.kernel_re.assign(n * w, T(0));
  cache.kernel_im.assign(n * w, T(0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto h = GaborKernel<T>(params.gabor.mu[i], params.gabor.sigma_t[i], w);
    for (std::size_t t = 0; t < w; ++t) {
      cache.kernel_re[i * w + t] = h[w - 1 - t].real();
      cache.kernel_im[i * w + t] = h[w - 1 - t].imag();
    }
  }
  const std::size_t wp = params.pooling.kernel_width;
  cache.pool_kernels.assign(n * wp, T(0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = PoolingKernel<T>(params.pooling.sigma_p[i], wp);
    std::copy(g.begin(), g.end(), cache.pool_kernels.begin() + static_cast<std::ptrdiff_t>(i * wp));
  }
}

// z_i[n] = sum_t krev_i[t] * x[n + t - H], restricted to in-range x.
template <typename T>
void RunFilterBank(std::span<const T> x, std::size_t n_filters, std::size_t width,
                   const std::vector<T>& kre, const std::vector<T>& kim, std::vector<T>& zre,
                   std::vector<T>& zim, FeatureMap<T>& y1) {
  const auto len = static_cast<std::ptrdiff_t>(x.size());
  const auto half = static_cast<std::ptrdiff_t>(width / 2);
  zre.assign(n_filters * x.size(), T(0));
  zim.assign(n_filters * x.size(), T(0));
  y1 = FeatureMap<T>(n_filters, x.size());
  for (std::size_t i = 0; i < n_filters; ++i) {
    T* zr = zre.data() + i * x.size();
    T* zi = zim.data() + i * x.size();
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(width); ++t) {
      const T hr = kre[i * width + static_cast<std::size_t>(t)];
      const T hi = kim[i * width + static_cast<std::size_t>(t)];
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, half - t);
      const std::ptrdiff_t hi_n = std::min<std::ptrdiff_t>(len, half + len - t);
      const T* xs = x.data() + (t - half);
      for (std::ptrdiff_t n = lo; n < hi_n; ++n) {
        zr[n] += hr * xs[n];
        zi[n] += hi * xs[n];
      }
    }
    T* out = y1.values.data() + i * x.size();
    for (std::size_t n = 0; n < x.size(); ++n) out[n] = zr[n] * zr[n] + zi[n] * zi[n];
  }
}

template <typename T>
FeatureMap<T> RunPooling(const FeatureMap<T>& y1, std::size_t stride, std::size_t wp,
                         const std::vector<T>& kernels) {
  const std::size_t len = y1.frames;
  const std::size_t frames = (len + stride - 1) / stride;
  const auto half = static_cast<std::ptrdiff_t>(wp / 2);
  FeatureMap<T> y2(y1.channels, frames);
  for (std::size_t i = 0; i < y1.channels; ++i) {
    const T* g = kernels.data() + i * wp;
    const auto row = y1.row(i);
    for (std::size_t m = 0; m < frames; ++m) {
      const auto c = static_cast<std::ptrdiff_t>(m * stride);
      T acc = T(0);
      for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(wp); ++j) {
        const std::ptrdiff_t n = c - half + j;
        if (n >= 0 && n < static_cast<std::ptrdiff_t>(len)) acc += row[static_cast<std::size_t>(n)] * g[j];
      }
      y2.at(i, m) = acc;
    }
  }
  return y2;
}

template <typename T>
FeatureMap<T> RunPcen(const FeatureMap<T>& y2, const PcenParams<T>& p, FeatureMap<T>* smooth_out) {
  FeatureMap<T> out(y2.channels, y2.frames);
  FeatureMap<T> smooth(y2.channels, y2.frames);
  for (std::size_t i = 0; i < y2.channels; ++i) {
    const T alpha = p.alpha[i], delta = p.delta[i], r = p.r[i];
    const T offset = std::pow(delta, r);
    T sm = T(0);
    for (std::size_t m = 0; m < y2.frames; ++m) {
      const T y = y2.at(i, m);
      if (!(y >= T(0))) {
        throw Error(ErrorKind::kDomain, "PCEN input must be nonnegative, got " +
                                            std::to_string(static_cast<double>(y)) + " at channel " +
                                            std::to_string(i) + ", frame " + std::to_string(m));
      }
      sm = m == 0 ? y : (T(1) - p.s) * sm + p.s * y;
      smooth.at(i, m) = sm;
      out.at(i, m) = std::pow(y * std::pow(p.eps + sm, -alpha) + delta, r) - offset;
    }
  }
  if (smooth_out) *smooth_out = std::move(smooth);
  return out;
}

}  // namespace

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

template <std::floating_point T>
std::size_t FrontendParams<T>::frames_for(std::size_t chunk_len) const {
  return (chunk_len + pooling.stride - 1) / pooling.stride;
}

template <std::floating_point T>
void FrontendParams<T>::validate() const {
  const std::size_t n = n_filters();
  auto need = [&](std::size_t got, const char* name) {
    if (got != n) {
      throw Error(ErrorKind::kParameter, std::string(name) + " has " + std::to_string(got) +
                                             " entries, expected " + std::to_string(n));
    }
  };
  if (n == 0) throw Error(ErrorKind::kParameter, "frontend needs at least one filter");
  need(gabor.sigma_t.size(), "sigma_t");
  need(pooling.sigma_p.size(), "sigma_p");
  need(pcen.alpha.size(), "alpha");
  need(pcen.delta.size(), "delta");
  need(pcen.r.size(), "r");
  if (kernel_width % 2 == 0 || pooling.kernel_width % 2 == 0) {
    throw Error(ErrorKind::kParameter, "kernel widths must be odd");
  }
  if (pooling.stride == 0) throw Error(ErrorKind::kParameter, "pooling stride must be >= 1");
  if (!(pcen.s > T(0) && pcen.s <= T(1)) || !(pcen.eps > T(0))) {
    throw Error(ErrorKind::kParameter, "PCEN needs s in (0, 1] and eps > 0");
  }
}

template <std::floating_point T>
std::vector<std::complex<T>> GaborKernel(T mu, T sigma, std::size_t width) {
  CheckKernelArgs(static_cast<double>(sigma), width, "Gabor kernel");
  const auto half = static_cast<std::ptrdiff_t>(width / 2);
  const T norm = T(1) / (std::sqrt(T(2) * std::numbers::pi_v<T>) * sigma);
  std::vector<std::complex<T>> h(width);
  for (std::ptrdiff_t k = -half; k <= half; ++k) {
    const T kf = static_cast<T>(k);
    const T env = norm * std::exp(-kf * kf / (T(2) * sigma * sigma));
    const T phase = T(2) * std::numbers::pi_v<T> * mu * kf;
    h[static_cast<std::size_t>(k + half)] = {env * std::cos(phase), env * std::sin(phase)};
  }
  return h;
}

template <std::floating_point T>
std::vector<T> GaussianKernel(T sigma, std::size_t width) {
  CheckKernelArgs(static_cast<double>(sigma), width, "Gaussian kernel");
  const auto half = static_cast<std::ptrdiff_t>(width / 2);
  const T norm = T(1) / (std::sqrt(T(2) * std::numbers::pi_v<T>) * sigma);
  std::vector<T> g(width);
  for (std::ptrdiff_t k = -half; k <= half; ++k) {
    const T kf = static_cast<T>(k);
    g[static_cast<std::size_t>(k + half)] = norm * std::exp(-kf * kf / (T(2) * sigma * sigma));
  }
  return g;
}

template <std::floating_point T>
std::vector<T> PoolingKernel(T sigma, std::size_t width) {
  auto g = GaussianKernel(sigma, width);
  T sum = T(0);
  for (T v : g) sum += v;
  for (T& v : g) v /= sum;
  return g;
}

template <std::floating_point T>
FeatureMap<T> FilterStage(std::span<const T> x, const GaborFilterParams<T>& params,
                          std::size_t kernel_width) {
  if (params.mu.size() != params.sigma_t.size()) {
    throw Error(ErrorKind::kParameter, "mu and sigma_t lengths differ");
  }
  const std::size_t n = params.mu.size();
  std::vector<T> kre(n * kernel_width), kim(n * kernel_width);
  for (std::size_t i = 0; i < n; ++i) {
    const auto h = GaborKernel<T>(params.mu[i], params.sigma_t[i], kernel_width);
    for (std::size_t t = 0; t < kernel_width; ++t) {
      kre[i * kernel_width + t] = h[kernel_width - 1 - t].real();
      kim[i * kernel_width + t] = h[kernel_width - 1 - t].imag();
    }
  }
  std::vector<T> zre, zim;
  FeatureMap<T> y1;
  RunFilterBank(x, n, kernel_width, kre, kim, zre, zim, y1);
  return y1;
}

template <std::floating_point T>
FeatureMap<T> PoolingStage(const FeatureMap<T>& y1, const PoolingParams<T>& params) {
  if (params.sigma_p.size() != y1.channels) {
    throw Error(ErrorKind::kParameter, "sigma_p length does not match channel count");
  }
  if (params.stride == 0) throw Error(ErrorKind::kParameter, "pooling stride must be >= 1");
  const std::size_t wp = params.kernel_width;
  std::vector<T> kernels(y1.channels * wp);
  for (std::size_t i = 0; i < y1.channels; ++i) {
    const auto g = PoolingKernel<T>(params.sigma_p[i], wp);
    std::copy(g.begin(), g.end(), kernels.begin() + static_cast<std::ptrdiff_t>(i * wp));
  }
  return RunPooling(y1, params.stride, wp, kernels);
}

template <std::floating_point T>
FeatureMap<T> PcenStage(const FeatureMap<T>& y2, const PcenParams<T>& params) {
  if (params.alpha.size() != y2.channels || params.delta.size() != y2.channels ||
      params.r.size() != y2.channels) {
    throw Error(ErrorKind::kParameter, "PCEN parameter lengths do not match channel count");
  }
  return RunPcen<T>(y2, params, nullptr);
}

template <std::floating_point T>
FeatureMap<T> FrontendForward(std::span<const T> x, const FrontendParams<T>& params,
                              FrontendCache<T>* cache) {
  params.validate();
  if (x.empty()) throw Error(ErrorKind::kValidation, "frontend input chunk is empty");
  FrontendCache<T> local;
  FrontendCache<T>& c = cache ? *cache : local;
  PrepareKernels(params, c);
  c.input.assign(x.begin(), x.end());
  RunFilterBank(x, params.n_filters(), params.kernel_width, c.kernel_re, c.kernel_im, c.z_re,
                c.z_im, c.y1);
  c.y2 = RunPooling(c.y1, params.pooling.stride, params.pooling.kernel_width, c.pool_kernels);
  return RunPcen(c.y2, params.pcen, &c.smooth);
}

template <std::floating_point T>
FrontendGradients<T> FrontendBackward(const FrontendParams<T>& params,
                                      const FrontendCache<T>& cache,
                                      const FeatureMap<T>& upstream) {
  const std::size_t n_filt = params.n_filters();
  const FeatureMap<T>& y2 = cache.y2;
  if (upstream.channels != y2.channels || upstream.frames != y2.frames) {
    throw Error(ErrorKind::kShapeMismatch,
                "upstream gradient is " + std::to_string(upstream.channels) + "x" +
                    std::to_string(upstream.frames) + ", feature map is " +
                    std::to_string(y2.channels) + "x" + std::to_string(y2.frames));
  }
  for (T v : upstream.values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kNumeric, "non-finite upstream gradient");
  }

  FrontendGradients<T> grads;
  grads.mu.assign(n_filt, T(0));
  grads.sigma_t.assign(n_filt, T(0));
  grads.sigma_p.assign(n_filt, T(0));
  grads.alpha.assign(n_filt, T(0));
  grads.delta.assign(n_filt, T(0));
  grads.r.assign(n_filt, T(0));

  const std::span<const T> x(cache.input);
  const std::size_t len = x.size();
  const std::size_t frames = y2.frames;
  const std::size_t stride = params.pooling.stride;
  const std::size_t wp = params.pooling.kernel_width;
  const std::size_t w = params.kernel_width;
  const auto half_p = static_cast<std::ptrdiff_t>(wp / 2);
  const auto half = static_cast<std::ptrdiff_t>(w / 2);
  const auto slen = static_cast<std::ptrdiff_t>(len);
  const T pi2 = T(2) * std::numbers::pi_v<T>;

  std::vector<T> g_y2(frames), g_smooth(frames), g_y1(len), g_zr(len), g_zi(len);
  std::vector<T> g_hr(w), g_hi(w), g_pool(wp);

  for (std::size_t i = 0; i < n_filt; ++i) {
    // PCEN.
    const T alpha = params.pcen.alpha[i], delta = params.pcen.delta[i], r = params.pcen.r[i];
    const T s = params.pcen.s, eps = params.pcen.eps;
    std::fill(g_y2.begin(), g_y2.end(), T(0));
    std::fill(g_smooth.begin(), g_smooth.end(), T(0));
    T ga = 0, gd = 0, gr = 0;
    const T delta_pow_r1 = r * std::pow(delta, r - T(1));
    const T delta_powlog = PowLog(delta, r);
    for (std::size_t m = 0; m < frames; ++m) {
      const T g = upstream.at(i, m);
      if (g == T(0)) continue;
      const T y = y2.at(i, m);
      const T d = eps + cache.smooth.at(i, m);
      const T q = std::pow(d, -alpha);
      const T u = y * q + delta;
      const T ur1 = r * std::pow(u, r - T(1));
      ga += g * ur1 * y * q * (-std::log(d));
      gd += g * (ur1 - delta_pow_r1);
      gr += g * (PowLog(u, r) - delta_powlog);
      g_y2[m] += g * ur1 * q;
      g_smooth[m] += g * ur1 * y * (-alpha) * q / d;
    }
    for (std::size_t m = frames; m-- > 1;) {
      g_y2[m] += s * g_smooth[m];
      g_smooth[m - 1] += (T(1) - s) * g_smooth[m];
    }
    if (frames > 0) g_y2[0] += g_smooth[0];
    grads.alpha[i] = ga;
    grads.delta[i] = gd;
    grads.r[i] = gr;

    // Gaussian pooling: y2[m] = sum_j y1[c - H_p + j] * gamma[j].
    std::fill(g_y1.begin(), g_y1.end(), T(0));
    std::fill(g_pool.begin(), g_pool.end(), T(0));
    const T* gamma = cache.pool_kernels.data() + i * wp;
    const auto y1_row = cache.y1.row(i);
    for (std::size_t m = 0; m < frames; ++m) {
      const T g = g_y2[m];
      if (g == T(0)) continue;
      const auto c = static_cast<std::ptrdiff_t>(m * stride);
      for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(wp); ++j) {
        const std::ptrdiff_t n = c - half_p + j;
        if (n < 0 || n >= slen) continue;
        g_y1[static_cast<std::size_t>(n)] += g * gamma[j];
        g_pool[static_cast<std::size_t>(j)] += g * y1_row[static_cast<std::size_t>(n)];
      }
    }
    // gamma_j = e_j / sum(e); d gamma_j / d sigma = gamma_j (k_j^2 - E[k^2]) / sigma^3.
    {
      const T sp = params.pooling.sigma_p[i];
      T mean_k2 = 0;
      for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(wp); ++j) {
        const T k = static_cast<T>(j - half_p);
        mean_k2 += gamma[j] * k * k;
      }
      T acc = 0;
      for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(wp); ++j) {
        const T k = static_cast<T>(j - half_p);
        acc += g_pool[static_cast<std::size_t>(j)] * gamma[j] * (k * k - mean_k2);
      }
      grads.sigma_p[i] = acc / (sp * sp * sp);
    }

    // Squared modulus.
    const T* zr = cache.z_re.data() + i * len;
    const T* zi = cache.z_im.data() + i * len;
    bool any = false;
    for (std::size_t n = 0; n < len; ++n) {
      g_zr[n] = T(2) * zr[n] * g_y1[n];
      g_zi[n] = T(2) * zi[n] * g_y1[n];
      any = any || g_y1[n] != T(0);
    }
    if (!any) continue;

    // Filter taps (time-reversed index t): g_h[t] = sum_n g_z[n] x[n + t - H].
    std::fill(g_hr.begin(), g_hr.end(), T(0));
    std::fill(g_hi.begin(), g_hi.end(), T(0));
    for (std::ptrdiff_t n = 0; n < slen; ++n) {
      const T gr_n = g_zr[static_cast<std::size_t>(n)];
      const T gi_n = g_zi[static_cast<std::size_t>(n)];
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, half - n);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(w), half - n + slen);
      const T* xs = x.data() + (n - half);
      for (std::ptrdiff_t t = lo; t < hi; ++t) {
        g_hr[static_cast<std::size_t>(t)] += gr_n * xs[t];
        g_hi[static_cast<std::size_t>(t)] += gi_n * xs[t];
      }
    }

    // Kernel parameters. Tap t holds h[k] with k = H - t.
    const T mu = params.gabor.mu[i];
    const T sigma = params.gabor.sigma_t[i];
    const T norm = T(1) / (std::sqrt(pi2) * sigma);
    T g_mu = 0, g_sigma = 0;
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(w); ++t) {
      const T k = static_cast<T>(half - t);
      const T env = norm * std::exp(-k * k / (T(2) * sigma * sigma));
      const T phase = pi2 * mu * k;
      const T c = std::cos(phase), sn = std::sin(phase);
      const T ghr = g_hr[static_cast<std::size_t>(t)];
      const T ghi = g_hi[static_cast<std::size_t>(t)];
      g_mu += pi2 * k * env * (ghi * c - ghr * sn);
      g_sigma += (ghr * c + ghi * sn) * env * (k * k / (sigma * sigma * sigma) - T(1) / sigma);
    }
    grads.mu[i] = g_mu;
    grads.sigma_t[i] = g_sigma;
  }
  return grads;
}

template <std::floating_point T>
FrontendGradients<T> ComputeFrontendGradients(std::span<const T> x,
                                              const FrontendParams<T>& params,
                                              const FeatureMap<T>& upstream) {
  FrontendCache<T> cache;
  FrontendForward(x, params, &cache);
  return FrontendBackward(params, cache, upstream);
}

template <std::floating_point T>
FrontendParams<T> InitMel(std::size_t n_filters, int sample_rate_hz, double f_min_hz,
                          double f_max_hz, std::size_t kernel_width, double pooling_sigma) {
  if (n_filters < 2) throw Error(ErrorKind::kParameter, "mel initialization needs N >= 2");
  if (sample_rate_hz <= 0 || !(f_min_hz >= 0.0) || !(f_min_hz < f_max_hz) ||
      f_max_hz > sample_rate_hz / 2.0) {
    throw Error(ErrorKind::kParameter,
                "invalid band edges: need 0 <= f_min < f_max <= rate/2, got f_min=" +
                    std::to_string(f_min_hz) + " f_max=" + std::to_string(f_max_hz) +
                    " rate=" + std::to_string(sample_rate_hz));
  }
  if (kernel_width % 2 == 0) throw Error(ErrorKind::kParameter, "kernel width must be odd");

  // N + 2 mel-equidistant points; the outer two are the band edges.
  const double mel_lo = HzToMel(f_min_hz), mel_hi = HzToMel(f_max_hz);
  const double step = (mel_hi - mel_lo) / static_cast<double>(n_filters + 1);
  std::vector<double> grid_hz(n_filters + 2);
  for (std::size_t k = 0; k < grid_hz.size(); ++k) {
    grid_hz[k] = MelToHz(mel_lo + step * static_cast<double>(k));
  }

  // Gaussian envelope of width sigma_t has frequency-domain std 1 / (2 pi sigma_t).
  const double fwhm_factor = 2.0 * std::sqrt(2.0 * std::log(2.0));
  FrontendParams<T> p;
  p.kernel_width = kernel_width;
  for (std::size_t i = 0; i < n_filters; ++i) {
    const double center = grid_hz[i + 1] / sample_rate_hz;
    const double spacing = 0.5 * (grid_hz[i + 2] - grid_hz[i]) / sample_rate_hz;
    const double sigma_f = spacing / fwhm_factor;
    const double sigma_t = std::max(0.5, 1.0 / (2.0 * std::numbers::pi * sigma_f));
    p.gabor.mu.push_back(static_cast<T>(center));
    p.gabor.sigma_t.push_back(static_cast<T>(sigma_t));
  }
  p.pooling.sigma_p.assign(n_filters, static_cast<T>(pooling_sigma));
  p.pcen.alpha.assign(n_filters, T(0.96));
  p.pcen.delta.assign(n_filters, T(2));
  p.pcen.r.assign(n_filters, T(0.5));
  return p;
}

template <std::floating_point T>
void ClampFrontend(FrontendParams<T>& params, std::size_t chunk_len,
                   const FrontendClampRules& rules) {
  double mu_lo = 1.0 / static_cast<double>(std::max<std::size_t>(chunk_len, 1));
  double mu_hi = 0.5 - mu_lo;
  if (mu_lo > mu_hi) mu_lo = mu_hi = 0.25;
  auto clamp_all = [](std::vector<T>& v, double lo, double hi) {
    for (T& e : v) e = std::clamp(e, static_cast<T>(lo), static_cast<T>(hi));
  };
  const double inf = std::numeric_limits<double>::max();
  clamp_all(params.gabor.mu, mu_lo, mu_hi);
  clamp_all(params.gabor.sigma_t, rules.sigma_floor, inf);
  clamp_all(params.pooling.sigma_p, rules.sigma_floor, inf);
  clamp_all(params.pcen.r, rules.r_min, rules.r_max);
  clamp_all(params.pcen.alpha, rules.alpha_floor, inf);
  clamp_all(params.pcen.delta, rules.delta_floor, inf);
}

#define SRCCOUNT_INSTANTIATE_FRONTEND(T)                                                     \
  template struct FrontendParams<T>;                                                         \
  template std::vector<std::complex<T>> GaborKernel<T>(T, T, std::size_t);                  \
  template std::vector<T> GaussianKernel<T>(T, std::size_t);                                \
  template std::vector<T> PoolingKernel<T>(T, std::size_t);                                 \
  template FeatureMap<T> FilterStage<T>(std::span<const T>, const GaborFilterParams<T>&,    \
                                        std::size_t);                                       \
  template FeatureMap<T> PoolingStage<T>(const FeatureMap<T>&, const PoolingParams<T>&);    \
  template FeatureMap<T> PcenStage<T>(const FeatureMap<T>&, const PcenParams<T>&);          \
  template FeatureMap<T> FrontendForward<T>(std::span<const T>, const FrontendParams<T>&,   \
                                            FrontendCache<T>*);                             \
  template FrontendGradients<T> FrontendBackward<T>(                                        \
      const FrontendParams<T>&, const FrontendCache<T>&, const FeatureMap<T>&);             \
  template FrontendGradients<T> ComputeFrontendGradients<T>(                                \
      std::span<const T>, const FrontendParams<T>&, const FeatureMap<T>&);                  \
  template FrontendParams<T> InitMel<T>(std::size_t, int, double, double, std::size_t,      \
                                        double);                                            \
  template void ClampFrontend<T>(FrontendParams<T>&, std::size_t, const FrontendClampRules&);

SRCCOUNT_INSTANTIATE_FRONTEND(float)
SRCCOUNT_INSTANTIATE_FRONTEND(double)

#undef SRCCOUNT_INSTANTIATE_FRONTEND

}  // namespace srccount
