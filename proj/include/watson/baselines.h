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

#ifndef WATSON_BASELINES_H_
#define WATSON_BASELINES_H_

#include <span>
#include <vector>

#include "watson/image.h"

namespace watson {

struct SsimParams {
  double k1 = 0.01;
  double k2 = 0.03;
  int window_size = 11;
  double window_sigma = 1.5;
  double dynamic_range = 1.0;

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
  void Validate() const;
};

// Normalized (sum 1) separable Gaussian window, window_size^2 row-major.
std::vector<double> GaussianWindow(const SsimParams& params);

// SSIM of two windows under weights (same length, weights sum to 1), using
// weighted means, variances and covariance.
double SsimBlock(std::span<const double> x, std::span<const double> y,
                 std::span<const double> weights, const SsimParams& params);

// 1 - mean SSIM over all valid stride-1 window positions, averaged over
// channels in the images' own colorspace.
double SsimDistance(const Image& x, const Image& x2,
                    const SsimParams& params = {});

// Gradient of SsimDistance with respect to both inputs. Returns the value.
double SsimDistanceGrad(const Image& x, const Image& x2,
                        const SsimParams& params, Image* grad_x,
                        Image* grad_x2);

// ||x - x'||_p over all pixels and channels, p >= 1.
double LpDistance(const Image& x, const Image& x2, double p);

// Gradient 0 is used when x == x'. Returns the value.
double LpDistanceGrad(const Image& x, const Image& x2, double p, Image* grad_x,
                      Image* grad_x2);

}  // namespace watson

#endif  // WATSON_BASELINES_H_
