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

#ifndef WATSON_GRAD_H_
#define WATSON_GRAD_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "watson/image.h"
#include "watson/metric.h"
#include "watson/params.h"
#include "watson/transforms.h"

namespace watson {

// ---------------------------------------------------------------------------
// Unconstrained parameterization. Layout of the free vector:
//   [alpha, logit(r), log(p - 1), log(lambda) (colour only),
//    log(T) per channel, log(w) per channel (DFT only), log(gamma)].

struct FreeLayout {
  size_t alpha = 0;
  size_t r = 1;
  size_t p = 2;
  size_t lambda = 3;
  size_t lambda_count = 0;
  size_t sensitivity = 0;  // first T entry
  size_t phase_weight = 0;  // first w entry (== gamma when absent)
  size_t gamma = 0;
  size_t size = 0;

  explicit FreeLayout(const WatsonParams& params);
};

std::vector<double> ToUnconstrained(const WatsonParams& params);

// `shape` supplies the variant, channels, block size and epsilon.
WatsonParams FromUnconstrained(const WatsonParams& shape,
                               std::span<const double> free);

// ---------------------------------------------------------------------------

enum class GradTarget { kParams, kFirstInput, kSecondInput };

// The distance is differentiated at one fixed grid offset.
struct GradientRequest {
  GradTarget wrt = GradTarget::kParams;
  BlockGrid grid;
};

// `gradient` is shaped like the target: the free parameter vector (empty for
// metrics without trainable parameters) or the flat pixel buffer of x / x'.
struct GradientResult {
  double value = 0.0;
  std::vector<double> gradient;
};

// The value is produced by the same forward code as Distance() and so
// matches it bit for bit. Throws NumericalError on non-finite nodes.
GradientResult ValueAndGrad(const GradientRequest& request,
                            const Metric& metric, const Image& x,
                            const Image& x2);

// Both input gradients from a single forward pass.
struct InputGradients {
  double value = 0.0;
  Image first;
  Image second;
};
InputGradients ValueAndInputGrads(const Metric& metric, const Image& x,
                                  const Image& x2, const BlockGrid& grid);

// ---------------------------------------------------------------------------
// Subgradient registry. Every non-smooth point of the implemented formulas
// is encoded as a discrete code per graph node: the sign of each DCT
// coefficient of x (|C|), each bin's wrapped phase difference class (0, pi,
// or its sign), near-zero amplitudes, and the real-part sign of
// self-conjugate DFT bins; Lp with p = 1 contributes the sign of each pixel
// difference. Two evaluation points lie on the same smooth piece iff their
// signatures agree.
std::vector<int8_t> KinkSignature(const Metric& metric, const Image& x,
                                  const Image& x2, const BlockGrid& grid);

struct FiniteDiffReport {
  double max_rel_err = 0.0;
  size_t worst_coordinate = 0;
  size_t checked = 0;
  size_t excluded = 0;  // coordinates within kKinkMargin steps of a kink
  // Checked coordinates whose gradient is too small for the step to resolve:
  // |a - n| <= kRoundoffUlps * eps * |f| / step. Not part of max_rel_err.
  size_t below_resolution = 0;
  bool passed = true;  // max_rel_err < rtol
};

inline constexpr size_t kMaxCheckedCoordinates = 512;
inline constexpr double kRoundoffUlps = 16.0;
// Input coordinates are excluded when moving them by kKinkMargin * step in
// either direction changes the kink signature.
inline constexpr double kKinkMargin = 1000.0;

// Central differences on a deterministic sample of at most 512 coordinates.
// Relative error is |a - n| / (|a| + |n| + 1e-12).
FiniteDiffReport FiniteDiffCheck(const GradientRequest& request,
                                 const Metric& metric, const Image& x,
                                 const Image& x2, double step = 1e-5,
                                 double rtol = 1e-4);

}  // namespace watson

#endif  // WATSON_GRAD_H_
