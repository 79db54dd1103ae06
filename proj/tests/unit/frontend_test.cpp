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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "srccount/error.hpp"
#include "srccount/frontend.hpp"
#include "support.hpp"

using namespace srccount;
using testing::RelErr;

namespace {

constexpr double kPi = std::numbers::pi;

// N=8 filters, W=101, with every parameter moved away from its initial value.
FrontendParams<double> RandomParams(std::uint64_t seed, std::size_t n = 8, std::size_t w = 101) {
  auto p = InitMel<double>(n, 16000, 60.0, 7800.0, w);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    p.gabor.mu[i] *= 0.9 + 0.2 * u(rng);
    p.gabor.sigma_t[i] = 3.0 + 30.0 * u(rng);
    p.pooling.sigma_p[i] = 10.0 + 50.0 * u(rng);
    p.pcen.alpha[i] = 0.3 + 0.69 * u(rng);
    p.pcen.delta[i] = 0.5 + 2.5 * u(rng);
    p.pcen.r[i] = 0.2 + 0.7 * u(rng);
  }
  return p;
}

FeatureMap<double> RandomUpstream(std::size_t n, std::size_t m, std::uint64_t seed) {
  FeatureMap<double> g(n, m);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  for (double& v : g.values) v = d(rng);
  return g;
}

template <typename T>
std::vector<T>* Tensor(FrontendParams<T>& p, int k) {
  switch (k) {
    case 0: return &p.gabor.mu;
    case 1: return &p.gabor.sigma_t;
    case 2: return &p.pooling.sigma_p;
    case 3: return &p.pcen.alpha;
    case 4: return &p.pcen.delta;
    default: return &p.pcen.r;
  }
}

template <typename T>
const std::vector<T>& Grad(const FrontendGradients<T>& g, int k) {
  switch (k) {
    case 0: return g.mu;
    case 1: return g.sigma_t;
    case 2: return g.sigma_p;
    case 3: return g.alpha;
    case 4: return g.delta;
    default: return g.r;
  }
}

const char* kNames[] = {"mu", "sigma_t", "sigma_p", "alpha", "delta", "r"};

double Contract(const FeatureMap<double>& a, const FeatureMap<double>& b) {
  double s = 0;
  for (std::size_t k = 0; k < a.values.size(); ++k) s += a.values[k] * b.values[k];
  return s;
}

}  // namespace

TEST_CASE("gabor kernel center tap") {
  const auto h = GaborKernel<double>(0.0, 2.0, 5);
  REQUIRE(h.size() == 5);
  CHECK(h[2].real() == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0 * kPi))).epsilon(1e-12));
  CHECK(h[2].real() == doctest::Approx(0.199471).epsilon(1e-6));
  CHECK(h[2].imag() == 0.0);
}

TEST_CASE("gabor kernel at zero frequency equals the Gaussian kernel") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> sig(0.5, 50.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double s = sig(rng);
    const auto h = GaborKernel<double>(0.0, s, 201);
    const auto g = GaussianKernel<double>(s, 201);
    for (std::size_t n = 0; n < h.size(); ++n) {
      CHECK(std::abs(h[n].real() - g[n]) <= 1e-12);
      CHECK(std::abs(h[n].imag()) <= 1e-12);
    }
  }
}

TEST_CASE("gabor kernel envelope is even and peaks at the center") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> mu(0.0, 0.5), sig(0.5, 40.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto h = GaborKernel<double>(mu(rng), sig(rng), 101);
    for (std::size_t k = 0; k < 50; ++k) {
      CHECK(std::abs(h[k]) == doctest::Approx(std::abs(h[100 - k])).epsilon(1e-14));
      CHECK(std::abs(h[k]) <= std::abs(h[50]));
    }
  }
}

TEST_CASE("gabor kernel matches direct evaluation") {
  const double mu = 0.123, s = 7.5;
  const auto h = GaborKernel<double>(mu, s, 31);
  for (int n = -15; n <= 15; ++n) {
    const std::complex<double> expect = std::polar(1.0, 2 * kPi * mu * n) *
                                        (1.0 / (std::sqrt(2 * kPi) * s)) *
                                        std::exp(-n * n / (2 * s * s));
    CHECK(std::abs(h[static_cast<std::size_t>(n + 15)] - expect) < 1e-15);
  }
}

TEST_CASE("kernel construction rejects even width and nonpositive sigma") {
  CHECK_THROWS_AS(GaborKernel<double>(0.1, 2.0, 4), Error);
  CHECK_THROWS_AS(GaborKernel<double>(0.1, 0.0, 5), Error);
  CHECK_THROWS_AS(GaussianKernel<double>(-1.0, 5), Error);
  try {
    GaborKernel<double>(0.1, 2.0, 6);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kParameter);
  }
}

TEST_CASE("pooling kernel sums to one") {
  for (double s : {0.5, 3.0, 40.0, 200.0}) {
    const auto g = PoolingKernel<double>(s, 161);
    double sum = 0;
    for (double v : g) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("filter stage impulse response") {
  GaborFilterParams<double> p{{0.05, 0.2, 0.41}, {4.0, 9.0, 2.5}};
  const std::size_t len = 301, c = 150, w = 41;
  std::vector<double> x(len, 0.0);
  x[c] = 1.0;
  const auto y = FilterStage<double>(x, p, w);
  REQUIRE(y.channels == 3);
  REQUIRE(y.frames == len);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto h = GaborKernel<double>(p.mu[i], p.sigma_t[i], w);
    for (std::size_t n = 0; n < len; ++n) {
      const long off = static_cast<long>(n) - static_cast<long>(c);
      const double expect = std::abs(off) <= 20 ? std::norm(h[static_cast<std::size_t>(off + 20)]) : 0.0;
      CHECK(std::abs(y.at(i, n) - expect) <= 1e-15 + 1e-12 * expect);
    }
  }
}

TEST_CASE("filter stage of zeros is zero and output is nonnegative") {
  const auto p = RandomParams(1).gabor;
  const std::vector<double> zeros(400, 0.0);
  const auto z = FilterStage<double>(zeros, p, 101);
  CHECK(std::all_of(z.values.begin(), z.values.end(), [](double v) { return v == 0.0; }));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto y = FilterStage<double>(testing::RandomSignal(400, seed), p, 101);
    CHECK(std::all_of(y.values.begin(), y.values.end(), [](double v) { return v >= 0.0; }));
  }
}

TEST_CASE("filter stage tone response matches brute-force DTFT") {
  const auto params = InitMel<double>(40, 16000, 60.0, 7800.0, 401);
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> pick(0, 39);
  const std::size_t len = 2400, w = 401;
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t i = pick(rng);
    const double f = params.gabor.mu[i];
    GaborFilterParams<double> one{{f}, {params.gabor.sigma_t[i]}};
    std::vector<double> x(len);
    for (std::size_t n = 0; n < len; ++n) x[n] = std::cos(2 * kPi * f * static_cast<double>(n));
    const auto y = FilterStage<double>(x, one, w);
    const double oracle = std::norm(testing::Dtft(GaborKernel<double>(f, one.sigma_t[0], w), f)) / 4.0;
    for (std::size_t n = w; n + w < len; ++n) {
      CHECK(RelErr(y.at(0, n), oracle) < 0.05);
    }
  }
}

TEST_CASE("filter stage is shift covariant in the interior") {
  const auto p = RandomParams(2).gabor;
  const std::size_t len = 800, d = 37;
  const auto x = testing::RandomSignal(len + d, 44);
  const std::vector<double> a(x.begin() + d, x.end()), b(x.begin(), x.begin() + len);
  const auto ya = FilterStage<double>(a, p, 101), yb = FilterStage<double>(b, p, 101);
  // a[n] = b[n + d].
  for (std::size_t i = 0; i < p.mu.size(); ++i) {
    for (std::size_t n = 102; n + d + 102 < len; ++n) {
      CHECK(std::abs(ya.at(i, n) - yb.at(i, n + d)) < 1e-9);
    }
  }
}

TEST_CASE("pure tone lands in its own channel") {
  const auto params = InitMel<double>(40, 16000, 60.0, 7800.0, 401);
  const std::size_t len = 2000;
  for (std::size_t k = 0; k < 40; ++k) {
    std::vector<double> x(len);
    for (std::size_t n = 0; n < len; ++n) x[n] = std::sin(2 * kPi * params.gabor.mu[k] * static_cast<double>(n));
    const auto y = FilterStage<double>(x, params.gabor, 401);
    std::size_t best = 0;
    double best_energy = -1;
    for (std::size_t i = 0; i < 40; ++i) {
      double e = 0;
      for (std::size_t n = 0; n < len; ++n) e += y.at(i, n);
      if (e > best_energy) {
        best_energy = e;
        best = i;
      }
    }
    CHECK(best == k);
  }
}

TEST_CASE("pooling preserves constants where the kernel is fully supported") {
  PoolingParams<double> p;
  p.sigma_p = {0.5, 12.0, 40.0};
  const std::size_t len = 1200;
  FeatureMap<double> y1(3, len);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t n = 0; n < len; ++n) y1.at(i, n) = 0.5 + static_cast<double>(i);
  }
  const auto y2 = PoolingStage(y1, p);
  CHECK(y2.frames == (len + 159) / 160);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t m = 0; m < y2.frames; ++m) {
      const std::size_t c = m * 160;
      if (c >= 80 && c + 80 < len) CHECK(std::abs(y2.at(i, m) - (0.5 + i)) < 1e-12);
    }
  }
}

TEST_CASE("pooling with a tiny sigma and unit stride is the identity") {
  PoolingParams<double> p;
  p.sigma_p = {0.25};
  p.stride = 1;
  p.kernel_width = 9;
  FeatureMap<double> y1(1, 50);
  const auto x = testing::RandomSignal(50, 3);
  for (std::size_t n = 0; n < 50; ++n) y1.at(0, n) = std::abs(x[n]);
  const auto y2 = PoolingStage(y1, p);
  for (std::size_t n = 4; n < 46; ++n) {
    // Oracle: direct convolution with the renormalized kernel.
    const auto g = PoolingKernel<double>(0.25, 9);
    double direct = 0;
    for (int j = -4; j <= 4; ++j) direct += g[static_cast<std::size_t>(j + 4)] * y1.at(0, n + j);
    CHECK(std::abs(y2.at(0, n) - direct) < 1e-15);
    CHECK(std::abs(y2.at(0, n) - y1.at(0, n)) < 1e-3);
  }
}

TEST_CASE("frame count is ceil(L / stride)") {
  auto p = InitMel<double>(40, 16000, 60.0, 7800.0, 401);
  const std::vector<double> x(400, 0.0);
  const auto y = FrontendForward<double>(x, p);
  CHECK(y.channels == 40);
  CHECK(y.frames == 3);
  CHECK(p.frames_for(161) == 2);
  CHECK(p.frames_for(160) == 1);
  CHECK(std::all_of(y.values.begin(), y.values.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("pcen identity configuration") {
  PcenParams<double> p{{0.0, 0.0}, {2.0, 0.0}, {1.0, 1.0}};
  FeatureMap<double> y(2, 17);
  const auto x = testing::RandomSignal(34, 8);
  for (std::size_t k = 0; k < y.values.size(); ++k) y.values[k] = std::abs(x[k]) * 10;
  const auto out = PcenStage(y, p);
  for (std::size_t k = 0; k < y.values.size(); ++k) CHECK(std::abs(out.values[k] - y.values[k]) <= 1e-12);
}

TEST_CASE("pcen constant-input fixed point") {
  PcenParams<double> p{{0.96}, {2.0}, {0.5}};
  const FeatureMap<double> y(1, 12, 1.0);
  const auto out = PcenStage(y, p);
  const double closed = std::sqrt(1.0 / std::pow(1.0 + 1e-6, 0.96) + 2.0) - std::sqrt(2.0);
  for (double v : out.values) {
    CHECK(std::abs(v - closed) <= 1e-9);
  }
}

TEST_CASE("pcen of zeros is zero and negative input is a domain error") {
  PcenParams<double> p{{0.96}, {2.0}, {0.5}};
  const FeatureMap<double> zeros(1, 5, 0.0);
  for (double v : PcenStage(zeros, p).values) CHECK(v == 0.0);
  FeatureMap<double> bad(1, 5, 1.0);
  bad.at(0, 3) = -1e-9;
  try {
    PcenStage(bad, p);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDomain);
  }
}

TEST_CASE("pcen is strictly increasing in each entry when alpha is zero") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    PcenParams<double> p{{0.0}, {u(rng) * 3}, {0.05 + 0.95 * u(rng)}};
    FeatureMap<double> y(1, 6);
    for (double& v : y.values) v = u(rng) * 5;
    const auto base = PcenStage(y, p);
    const std::size_t m = trial % 6;
    y.at(0, m) += 0.1 + u(rng);
    const auto up = PcenStage(y, p);
    CHECK(up.at(0, m) > base.at(0, m));
  }
}

TEST_CASE("mel initialization matches an independent mel grid") {
  const std::size_t n = 40;
  const double lo = 60.0, hi = 7800.0;
  const auto p = InitMel<double>(n, 16000, lo, hi, 401);
  auto mel = [](double f) { return 2595.0 * std::log10(1.0 + f / 700.0); };
  auto inv = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  std::vector<double> grid(n + 2);
  for (std::size_t k = 0; k < n + 2; ++k) grid[k] = inv(mel(lo) + (mel(hi) - mel(lo)) * k / (n + 1.0));
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(p.gabor.mu[i] == doctest::Approx(grid[i + 1] / 16000.0).epsilon(1e-12));
    const double sigma_f = 0.5 * (grid[i + 2] - grid[i]) / 16000.0 / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    CHECK(p.gabor.sigma_t[i] == doctest::Approx(std::max(0.5, 1.0 / (2 * kPi * sigma_f))).epsilon(1e-12));
    if (i > 0) CHECK(p.gabor.mu[i] > p.gabor.mu[i - 1]);
  }
  CHECK(p.gabor.mu.front() > 0.0);
  CHECK(p.gabor.mu.back() < 0.5);
  CHECK(p.pooling.sigma_p == std::vector<double>(n, 40.0));
  CHECK(p.pcen.alpha == std::vector<double>(n, 0.96));
  CHECK(p.pcen.delta == std::vector<double>(n, 2.0));
  CHECK(p.pcen.r == std::vector<double>(n, 0.5));
}

TEST_CASE("mel-initialized filters have half-amplitude width equal to the neighbor spacing") {
  const auto p = InitMel<double>(40, 16000, 60.0, 7800.0, 401);
  std::size_t checked = 0;
  for (std::size_t i = 1; i + 1 < 40; ++i) {
    const double s = p.gabor.sigma_t[i];
    if (3 * s > 200) continue;  // envelope truncated by the kernel width
    const auto h = GaborKernel<double>(p.gabor.mu[i], s, 401);
    const double spacing = 0.5 * (p.gabor.mu[i + 1] - p.gabor.mu[i - 1]);
    const double peak = std::abs(testing::Dtft(h, p.gabor.mu[i]));
    const double edge = std::abs(testing::Dtft(h, p.gabor.mu[i] + spacing / 2));
    CHECK(edge / peak == doctest::Approx(0.5).epsilon(0.01));
    ++checked;
  }
  CHECK(checked > 20);
}

TEST_CASE("mel initialization rejects bad band edges") {
  CHECK_THROWS_AS(InitMel<double>(40, 16000, 100.0, 50.0, 401), Error);
  CHECK_THROWS_AS(InitMel<double>(40, 16000, 60.0, 9000.0, 401), Error);
  CHECK_THROWS_AS(InitMel<double>(1, 16000, 60.0, 7800.0, 401), Error);
}

TEST_CASE("clamping enforces parameter bounds") {
  auto p = RandomParams(3);
  p.gabor.mu[0] = -0.1;
  p.gabor.mu[1] = 0.7;
  p.gabor.sigma_t[2] = 0.01;
  p.pooling.sigma_p[3] = -4;
  p.pcen.r[4] = 3;
  p.pcen.r[5] = 0;
  p.pcen.alpha[6] = -1;
  p.pcen.delta[7] = -1;
  ClampFrontend(p, 400);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(p.gabor.mu[i] >= 1.0 / 400);
    CHECK(p.gabor.mu[i] <= 0.5 - 1.0 / 400);
    CHECK(p.gabor.sigma_t[i] >= 0.5);
    CHECK(p.pooling.sigma_p[i] >= 0.5);
    CHECK(p.pcen.r[i] >= 0.05);
    CHECK(p.pcen.r[i] <= 1.0);
    CHECK(p.pcen.alpha[i] >= 0.0);
    CHECK(p.pcen.delta[i] > 0.0);
  }
}

TEST_CASE("frontend gradients match finite differences in double precision") {
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto p = RandomParams(seed);
    const auto x = testing::RandomSignal(400, 100 + seed);
    const auto up = RandomUpstream(8, 3, 200 + seed);
    const auto g = ComputeFrontendGradients<double>(x, p, up);
    auto loss = [&] { return Contract(FrontendForward<double>(x, p), up); };
    for (int t = 0; t < 6; ++t) {
      auto& values = *Tensor(p, t);
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double numeric = testing::Derivative(loss, values[i], 1e-4);
        const double err = RelErr(Grad(g, t)[i], numeric);
        worst = std::max(worst, err);
        CHECK_MESSAGE(err < 1e-5, std::string(kNames[t]), "[", i, "] seed ", seed, ": analytic ", Grad(g, t)[i],
                      " numeric ", numeric);
      }
    }
  }
  MESSAGE("worst relative error ", worst);
}

TEST_CASE("single-precision gradients match a double-precision oracle") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto pd = RandomParams(seed);
    const auto xd = testing::RandomSignal(400, 300 + seed);
    const auto up = RandomUpstream(8, 3, 400 + seed);

    FrontendParams<float> pf;
    pf.kernel_width = pd.kernel_width;
    for (int t = 0; t < 6; ++t) {
      Tensor(pf, t)->assign(Tensor(pd, t)->begin(), Tensor(pd, t)->end());
    }
    // Evaluate the oracle at exactly the float-rounded point.
    for (int t = 0; t < 6; ++t) Tensor(pd, t)->assign(Tensor(pf, t)->begin(), Tensor(pf, t)->end());
    const std::vector<float> xf(xd.begin(), xd.end());
    const std::vector<double> xr(xf.begin(), xf.end());
    FeatureMap<float> upf(8, 3);
    for (std::size_t k = 0; k < up.values.size(); ++k) upf.values[k] = static_cast<float>(up.values[k]);
    FeatureMap<double> upr(8, 3);
    for (std::size_t k = 0; k < up.values.size(); ++k) upr.values[k] = upf.values[k];

    const auto gf = ComputeFrontendGradients<float>(xf, pf, upf);
    auto loss = [&] { return Contract(FrontendForward<double>(xr, pd), upr); };
    // Normwise per tensor: single precision cannot resolve entries far below
    // the tensor's largest gradient.
    for (int t = 0; t < 6; ++t) {
      auto& values = *Tensor(pd, t);
      double max_diff = 0, max_ref = 0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double numeric = testing::Derivative(loss, values[i], 1e-4);
        max_diff = std::max(max_diff, std::abs(Grad(gf, t)[i] - numeric));
        max_ref = std::max(max_ref, std::abs(numeric));
      }
      const double err = max_diff / std::max(max_ref, 1e-12);
      CHECK_MESSAGE(err < 1e-3, std::string(kNames[t]), " seed ", seed, ": normwise error ", err);
    }
  }
}

TEST_CASE("zero upstream gives zero gradients") {
  const auto p = RandomParams(4);
  const auto x = testing::RandomSignal(400, 4);
  const auto g = ComputeFrontendGradients<double>(x, p, FeatureMap<double>(8, 3));
  for (int t = 0; t < 6; ++t) {
    for (double v : Grad(g, t)) CHECK(v == 0.0);
  }
}

TEST_CASE("channel separability of gradients") {
  const auto p = RandomParams(5);
  const auto x = testing::RandomSignal(400, 5);
  auto up = RandomUpstream(8, 3, 5);
  for (std::size_t m = 0; m < 3; ++m) up.at(2, m) = 0.0;
  const auto g = ComputeFrontendGradients<double>(x, p, up);
  for (int t = 0; t < 6; ++t) {
    for (std::size_t i = 0; i < 8; ++i) {
      if (i == 2) {
        CHECK(Grad(g, t)[i] == 0.0);
      } else {
        CHECK(Grad(g, t)[i] != 0.0);
      }
    }
  }
}

TEST_CASE("backward rejects non-finite or misshapen upstream") {
  const auto p = RandomParams(6);
  const auto x = testing::RandomSignal(400, 6);
  FrontendCache<double> cache;
  FrontendForward<double>(x, p, &cache);
  auto up = RandomUpstream(8, 3, 6);
  up.at(1, 1) = std::nan("");
  try {
    FrontendBackward(p, cache, up);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNumeric);
  }
  CHECK_THROWS_AS(FrontendBackward(p, cache, FeatureMap<double>(8, 4)), Error);
}

TEST_CASE("frontend forward is deterministic") {
  const auto p = RandomParams(7);
  const auto x = testing::RandomSignal(400, 7);
  CHECK(FrontendForward<double>(x, p).values == FrontendForward<double>(x, p).values);
}
