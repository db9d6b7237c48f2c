// Copyright 2026 The Watson Perceptual Loss Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WATSON_TESTS_TEST_UTIL_H_
#define WATSON_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "watson/image.h"

namespace watson::testing {

inline Image RandomImage(int h, int w, ColorSpace space, uint64_t seed,
                         double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Image img(h, w, space);
  for (double& v : img.pixels()) v = u(rng);
  return img;
}

// x plus seeded Gaussian noise, clamped to [0, 1].
inline Image Noisy(const Image& x, double sigma, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  Image out = x;
  for (double& v : out.pixels()) v = std::clamp(v + n(rng), 0.0, 1.0);
  return out;
}

inline std::vector<double> RandomBlock(int b, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> block(static_cast<size_t>(b) * b);
  for (double& v : block) v = u(rng);
  return block;
}

// Textbook O(B^4) orthonormal DCT-II.
inline std::vector<double> NaiveDct2(const std::vector<double>& x, int b) {
  const double pi = std::numbers::pi;
  std::vector<double> out(static_cast<size_t>(b) * b);
  for (int i = 0; i < b; ++i) {
    for (int j = 0; j < b; ++j) {
      const double ci = i == 0 ? std::sqrt(1.0 / b) : std::sqrt(2.0 / b);
      const double cj = j == 0 ? std::sqrt(1.0 / b) : std::sqrt(2.0 / b);
      double acc = 0.0;
      for (int y = 0; y < b; ++y) {
        for (int xx = 0; xx < b; ++xx) {
          acc += x[y * b + xx] * std::cos(pi * (2 * y + 1) * i / (2.0 * b)) *
                 std::cos(pi * (2 * xx + 1) * j / (2.0 * b));
        }
      }
      out[i * b + j] = ci * cj * acc;
    }
  }
  return out;
}

// Textbook O(B^4) unnormalized complex DFT, full B x B spectrum.
inline std::vector<std::complex<double>> NaiveDft2(const std::vector<double>& x,
                                                   int b) {
  const double pi = std::numbers::pi;
  std::vector<std::complex<double>> out(static_cast<size_t>(b) * b);
  for (int u = 0; u < b; ++u) {
    for (int v = 0; v < b; ++v) {
      std::complex<double> acc = 0.0;
      for (int y = 0; y < b; ++y) {
        for (int xx = 0; xx < b; ++xx) {
          const double theta = -2.0 * pi * (u * y + v * xx) / b;
          acc += x[y * b + xx] * std::polar(1.0, theta);
        }
      }
      out[u * b + v] = acc;
    }
  }
  return out;
}

}  // namespace watson::testing

#endif  // WATSON_TESTS_TEST_UTIL_H_
