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

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace srccount::testing {

inline std::vector<double> RandomSignal(std::size_t n, std::uint64_t seed, double amp = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  std::vector<double> x(n);
  for (double& v : x) v = u(rng);
  return x;
}

// Brute-force discrete-time Fourier transform of a kernel indexed from -(W-1)/2.
inline std::complex<double> Dtft(const std::vector<std::complex<double>>& h, double f) {
  const long half = static_cast<long>(h.size() - 1) / 2;
  std::complex<double> acc = 0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double n = static_cast<double>(static_cast<long>(k) - half);
    acc += h[k] * std::polar(1.0, -2.0 * std::numbers::pi * f * n);
  }
  return acc;
}

inline double RelErr(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Sixth-order central difference.
template <typename F>
double Derivative(F&& f, double& param, double h) {
  const double p0 = param;
  static constexpr double kOffsets[6] = {3, 2, 1, -1, -2, -3};
  static constexpr double kWeights[6] = {1, -9, 45, -45, 9, -1};
  double acc = 0;
  for (int q = 0; q < 6; ++q) {
    param = p0 + kOffsets[q] * h;
    acc += kWeights[q] * f();
  }
  param = p0;
  return acc / (60 * h);
}

}  // namespace srccount::testing
