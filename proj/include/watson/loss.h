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

#ifndef WATSON_LOSS_H_
#define WATSON_LOSS_H_

#include <functional>
#include <span>
#include <vector>

#include "watson/image.h"
#include "watson/params.h"
#include "watson/transforms.h"

namespace watson {

// Guards for the luminance ratio denominator and for |C|^r at C = 0.
inline constexpr double kDcEpsilon = 1e-10;
inline constexpr double kAbsEpsilon = 1e-12;

// ---------------------------------------------------------------------------
// Building blocks. Tensors are flat K x bins arrays.

// t_l[k, n] = T[n] * ((dc[k] + eps_dc) / (mean(dc) + eps_dc))^alpha.
std::vector<double> LuminanceMask(std::span<const double> table,
                                  std::span<const double> dc, double alpha);

// (a e^a + b e^b) / (e^a + e^b), evaluated with the larger exponent
// factored out.
double SmoothMax(double a, double b);

// s = smax(t_l, (|C| + eps_abs)^r t_l^(1 - r)), elementwise.
std::vector<double> ContrastMask(std::span<const double> t_l,
                                 std::span<const double> coeffs, double r);

// Maps an angle difference into (-pi, pi].
double WrapAngle(double delta);

// sum over blocks and bins with mask[n] != 0 of w[n] |wrap(phi - phi')|,
// i.e. w arccos(cos(phi - phi')).
double PhaseDistance(std::span<const double> phase,
                     std::span<const double> phase_other,
                     std::span<const double> weights,
                     std::span<const uint8_t> mask);

// ---------------------------------------------------------------------------
// Single-channel distances. Masking always comes from the first argument.

// (eps + sum |(C - C') / S|^p)^(1/p) over block DCT coefficients.
double WatsonDctDistance(std::span<const double> x, std::span<const double> x2,
                         int height, int width, const WatsonParams& params,
                         int channel, const BlockGrid& grid);

struct DftDistance {
  double amplitude = 0.0;  // Watson distance on DFT amplitudes
  double phase = 0.0;      // weighted phase distance, d.c. excluded
  double total() const { return amplitude + phase; }
};
DftDistance WatsonDftDistance(std::span<const double> x,
                              std::span<const double> x2, int height,
                              int width, const WatsonParams& params,
                              int channel, const BlockGrid& grid);

// lambda-weighted sum of per-channel losses of two 3-channel YCbCr images.
using ChannelLoss = std::function<double(int channel, std::span<const double>,
                                         std::span<const double>)>;
double ColorAggregate(const ChannelLoss& loss_fn, const Image& x,
                      const Image& x2, std::span<const double> lambda);

// ---------------------------------------------------------------------------
// Image-level distance.

struct WatsonResult {
  double value = 0.0;
  std::vector<double> channel_values;  // unweighted per-channel losses
  std::vector<double> amplitude_terms;  // DFT only
  std::vector<double> phase_terms;      // DFT only
};

// Brings `img` into the colorspace the parameters expect: grey parameters
// take the luma of colour inputs, YCbCr parameters convert RGB inputs.
Image ToWatsonSpace(const Image& img, const WatsonParams& params);

WatsonResult WatsonDistance(const Image& x, const Image& x2,
                            const WatsonParams& params, const BlockGrid& grid);

// ---------------------------------------------------------------------------
// Reverse pass. The forward pass records every intermediate of one channel;
// BackpropChannel walks the same graph backwards.

struct ChannelTape {
  WatsonVariant variant = WatsonVariant::kDft;
  int block_size = kBlockSize;
  int blocks = 0;
  int bins = 0;
  std::vector<int32_t> source;  // gather map shared by both inputs

  std::vector<double> coeff;        // DCT coefficients or DFT amplitudes of x
  std::vector<double> coeff_other;  // same for x'
  std::vector<double> re, im, re_other, im_other;  // DFT only
  std::vector<double> phase, phase_other;          // DFT only

  double dc_mean = 0.0;
  std::vector<double> dc_ratio;  // K
  std::vector<double> dc_gain;   // K, dc_ratio^alpha
  std::vector<double> t_l;       // K x bins
  std::vector<double> masked;    // second smax argument
  std::vector<double> s;         // contrast-masked divisor
  std::vector<double> scaled;    // (C - C') / s

  double pooled_sum = 0.0;
  double amplitude_term = 0.0;
  double phase_term = 0.0;
  double value = 0.0;
};

// Throws NumericalError naming the first non-finite node.
ChannelTape ForwardChannel(std::span<const double> x,
                           std::span<const double> x2, int height, int width,
                           const WatsonParams& params, int channel,
                           const BlockGrid& grid);

// Natural-space parameter gradients.
struct ParamGradient {
  double alpha = 0.0;
  double r = 0.0;
  double p = 0.0;
  std::vector<double> lambda;
  std::vector<std::vector<double>> sensitivity;
  std::vector<std::vector<double>> phase_weight;

  explicit ParamGradient(const WatsonParams& params);
};

struct InputGradient {
  std::vector<double> first;   // dL/dx plane
  std::vector<double> second;  // dL/dx' plane
};

// Accumulates upstream * d(value)/d(.) into `params_grad` and, when
// `inputs` is non-null, into its planes (sized H * W by the caller).
void BackpropChannel(const ChannelTape& tape, const WatsonParams& params,
                     int channel, double upstream, ParamGradient* params_grad,
                     InputGradient* inputs);

}  // namespace watson

#endif  // WATSON_LOSS_H_
