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

#include "watson/loss.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "watson/color.h"
#include "watson/errors.h"

namespace watson {
namespace {

constexpr double kPi = std::numbers::pi;

double Sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Loss mask over the coefficient layout: every bin for the DCT, the
// non-duplicate half-spectrum bins for the DFT.
std::vector<uint8_t> AmplitudeMask(const WatsonParams& params) {
  if (params.variant == WatsonVariant::kDct) {
    return std::vector<uint8_t>(params.bins(), 1);
  }
  return HalfSpectrumValidMask(params.block_size);
}

std::vector<uint8_t> PhaseMask(const WatsonParams& params) {
  std::vector<uint8_t> mask = HalfSpectrumValidMask(params.block_size);
  mask[0] = 0;  // d.c. phase carries no location
  return mask;
}

void CheckFiniteNode(std::span<const double> values, int bins,
                     const char* node) {
  for (size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericalError("non-finite value in node '" + std::string(node) +
                           "' (block " + std::to_string(i / bins) + ", bin " +
                           std::to_string(i % bins) + ")");
    }
  }
}

void CheckFiniteScalar(double v, const char* node) {
  if (!std::isfinite(v)) {
    throw NumericalError("non-finite value in node '" + std::string(node) + "'");
  }
}

void CheckChannel(const WatsonParams& params, int channel) {
  if (channel < 0 || channel >= params.channel_count()) {
    throw InputError("channel index " + std::to_string(channel) +
                     " out of range");
  }
}

}  // namespace

std::vector<double> LuminanceMask(std::span<const double> table,
                                  std::span<const double> dc, double alpha) {
  const size_t k_count = dc.size();
  double mean = 0.0;
  for (double v : dc) mean += v;
  mean /= static_cast<double>(k_count);
  std::vector<double> t_l(k_count * table.size());
  for (size_t k = 0; k < k_count; ++k) {
    const double gain =
        std::pow((dc[k] + kDcEpsilon) / (mean + kDcEpsilon), alpha);
    for (size_t n = 0; n < table.size(); ++n) {
      t_l[k * table.size() + n] = table[n] * gain;
    }
  }
  return t_l;
}

double SmoothMax(double a, double b) {
  const double m = std::max(a, b);
  const double ea = std::exp(a - m);
  const double eb = std::exp(b - m);
  return (a * ea + b * eb) / (ea + eb);
}

std::vector<double> ContrastMask(std::span<const double> t_l,
                                 std::span<const double> coeffs, double r) {
  std::vector<double> s(t_l.size());
  for (size_t i = 0; i < t_l.size(); ++i) {
    const double masked = std::pow(std::abs(coeffs[i]) + kAbsEpsilon, r) *
                          std::pow(t_l[i], 1.0 - r);
    s[i] = SmoothMax(t_l[i], masked);
  }
  return s;
}

double WrapAngle(double delta) {
  double d = std::fmod(delta, 2.0 * kPi);
  if (d > kPi) d -= 2.0 * kPi;
  if (d <= -kPi) d += 2.0 * kPi;
  return d;
}

double PhaseDistance(std::span<const double> phase,
                     std::span<const double> phase_other,
                     std::span<const double> weights,
                     std::span<const uint8_t> mask) {
  const size_t bins = weights.size();
  double total = 0.0;
  for (size_t i = 0; i < phase.size(); ++i) {
    const size_t n = i % bins;
    if (!mask[n]) continue;
    total += weights[n] * std::abs(WrapAngle(phase[i] - phase_other[i]));
  }
  return total;
}

ChannelTape ForwardChannel(std::span<const double> x,
                           std::span<const double> x2, int height, int width,
                           const WatsonParams& params, int channel,
                           const BlockGrid& grid) {
  CheckChannel(params, channel);
  const size_t plane = static_cast<size_t>(height) * width;
  if (x.size() != plane || x2.size() != plane) {
    throw InputError("channel planes do not match " + std::to_string(height) +
                     "x" + std::to_string(width));
  }
  if (grid.block_size != params.block_size) {
    throw InputError("grid block size differs from the parameter tables");
  }

  ChannelTape tape;
  tape.variant = params.variant;
  tape.block_size = params.block_size;
  tape.bins = params.bins();
  tape.source = PartitionSourceIndex(height, width, grid);
  const int b = params.block_size;
  const int bb = b * b;
  const int bins = tape.bins;
  const int k_count = static_cast<int>(tape.source.size()) / bb;
  tape.blocks = k_count;
  const size_t total = static_cast<size_t>(k_count) * bins;
  const bool dft = params.variant == WatsonVariant::kDft;

  tape.coeff.resize(total);
  tape.coeff_other.resize(total);
  if (dft) {
    tape.re.resize(total);
    tape.im.resize(total);
    tape.re_other.resize(total);
    tape.im_other.resize(total);
    tape.phase.resize(total);
    tape.phase_other.resize(total);
  }

  std::vector<double> block(bb), block_other(bb);
  for (int k = 0; k < k_count; ++k) {
    for (int i = 0; i < bb; ++i) {
      const int32_t src = tape.source[k * bb + i];
      block[i] = x[src];
      block_other[i] = x2[src];
    }
    const size_t off = static_cast<size_t>(k) * bins;
    if (!dft) {
      Dct2Block(block, std::span(tape.coeff).subspan(off, bins), b);
      Dct2Block(block_other, std::span(tape.coeff_other).subspan(off, bins), b);
      continue;
    }
    Rdft2Block(block, std::span(tape.re).subspan(off, bins),
               std::span(tape.im).subspan(off, bins), b);
    Rdft2Block(block_other, std::span(tape.re_other).subspan(off, bins),
               std::span(tape.im_other).subspan(off, bins), b);
    for (int n = 0; n < bins; ++n) {
      const size_t i = off + n;
      for (int side = 0; side < 2; ++side) {
        const double re = side == 0 ? tape.re[i] : tape.re_other[i];
        const double im = side == 0 ? tape.im[i] : tape.im_other[i];
        const double a = std::hypot(re, im);
        double phi = a < kZeroAmplitude ? 0.0 : std::atan2(im, re);
        if (phi == -kPi) phi = kPi;
        (side == 0 ? tape.coeff : tape.coeff_other)[i] = a;
        (side == 0 ? tape.phase : tape.phase_other)[i] = phi;
      }
    }
  }
  CheckFiniteNode(tape.coeff, bins, dft ? "amplitude" : "dct");
  CheckFiniteNode(tape.coeff_other, bins, dft ? "amplitude'" : "dct'");

  // Luminance masking.
  const std::vector<double>& table = params.sensitivity[channel];
  tape.dc_ratio.resize(k_count);
  tape.dc_gain.resize(k_count);
  double mean = 0.0;
  for (int k = 0; k < k_count; ++k) mean += tape.coeff[k * bins];
  mean /= k_count;
  tape.dc_mean = mean;
  tape.t_l.resize(total);
  for (int k = 0; k < k_count; ++k) {
    const double ratio = (tape.coeff[k * bins] + kDcEpsilon) / (mean + kDcEpsilon);
    const double gain = std::pow(ratio, params.alpha);
    tape.dc_ratio[k] = ratio;
    tape.dc_gain[k] = gain;
    for (int n = 0; n < bins; ++n) tape.t_l[k * bins + n] = table[n] * gain;
  }
  CheckFiniteNode(tape.t_l, bins, "luminance_mask");

  // Contrast masking and pooling.
  const std::vector<uint8_t> mask = AmplitudeMask(params);
  tape.masked.resize(total);
  tape.s.resize(total);
  tape.scaled.resize(total);
  double pooled = 0.0;
  for (size_t i = 0; i < total; ++i) {
    const double tl = tape.t_l[i];
    const double m = std::pow(std::abs(tape.coeff[i]) + kAbsEpsilon, params.r) *
                     std::pow(tl, 1.0 - params.r);
    const double s = SmoothMax(tl, m);
    tape.masked[i] = m;
    tape.s[i] = s;
    tape.scaled[i] = (tape.coeff[i] - tape.coeff_other[i]) / s;
    if (mask[i % bins]) pooled += std::pow(std::abs(tape.scaled[i]), params.p);
  }
  CheckFiniteNode(tape.s, bins, "contrast_mask");
  CheckFiniteNode(tape.scaled, bins, "scaled_difference");
  tape.pooled_sum = pooled;
  tape.amplitude_term = std::pow(params.epsilon + pooled, 1.0 / params.p);
  CheckFiniteScalar(tape.amplitude_term, "pooling");

  if (dft) {
    tape.phase_term = PhaseDistance(tape.phase, tape.phase_other,
                                    params.phase_weight[channel],
                                    PhaseMask(params));
    CheckFiniteScalar(tape.phase_term, "phase_distance");
  }
  tape.value = tape.amplitude_term + tape.phase_term;
  return tape;
}

ParamGradient::ParamGradient(const WatsonParams& params)
    : lambda(params.channel_count(), 0.0),
      sensitivity(params.channel_count(),
                  std::vector<double>(params.bins(), 0.0)) {
  if (params.variant == WatsonVariant::kDft) {
    phase_weight.assign(params.channel_count(),
                        std::vector<double>(params.bins(), 0.0));
  }
}

void BackpropChannel(const ChannelTape& tape, const WatsonParams& params,
                     int channel, double upstream, ParamGradient* params_grad,
                     InputGradient* inputs) {
  const int bins = tape.bins;
  const int k_count = tape.blocks;
  const size_t total = static_cast<size_t>(k_count) * bins;
  const bool dft = tape.variant == WatsonVariant::kDft;
  const double p = params.p;
  const double r = params.r;
  const std::vector<double>& table = params.sensitivity[channel];
  const std::vector<uint8_t> mask = AmplitudeMask(params);

  std::vector<double> d_coeff(total, 0.0), d_coeff_other(total, 0.0);
  std::vector<double> d_gain(k_count, 0.0);

  // value = (eps + S)^(1/p) with S = sum |u|^p.
  const double base = params.epsilon + tape.pooled_sum;
  const double d_sum = upstream * tape.amplitude_term / (p * base);
  double d_p = -upstream * tape.amplitude_term * std::log(base) / (p * p);
  double d_r = 0.0;
  std::vector<double>& d_table = params_grad->sensitivity[channel];

  for (size_t i = 0; i < total; ++i) {
    const int n = static_cast<int>(i % bins);
    if (!mask[n]) continue;
    const int k = static_cast<int>(i / bins);
    const double u = tape.scaled[i];
    const double au = std::abs(u);
    if (au == 0.0) continue;  // |u|^p with p > 1 is flat at 0
    const double au_p = std::pow(au, p);
    d_p += d_sum * au_p * std::log(au);
    const double d_u = d_sum * p * (au_p / au) * Sign(u);

    const double s = tape.s[i];
    d_coeff[i] += d_u / s;
    d_coeff_other[i] -= d_u / s;
    const double d_s = -d_u * u / s;

    // s = smax(t_l, m)
    const double tl = tape.t_l[i];
    const double m = tape.masked[i];
    const double top = std::max(tl, m);
    const double ea = std::exp(tl - top), em = std::exp(m - top);
    const double wa = ea / (ea + em), wm = em / (ea + em);
    double d_tl = d_s * wa * (1.0 + tl - s);
    const double d_m = d_s * wm * (1.0 + m - s);

    // m = (|C| + eps_abs)^r t_l^(1 - r)
    const double abs_c = std::abs(tape.coeff[i]) + kAbsEpsilon;
    d_tl += d_m * (1.0 - r) * m / tl;
    d_coeff[i] += d_m * r * m / abs_c * Sign(tape.coeff[i]);
    d_r += d_m * m * (std::log(abs_c) - std::log(tl));

    // t_l = T * gain_k
    d_table[n] += d_tl * tape.dc_gain[k];
    d_gain[k] += d_tl * table[n];
  }

  // gain_k = ratio_k^alpha, ratio_k = (dc_k + e) / (mean + e).
  double d_alpha = 0.0;
  double d_mean = 0.0;
  const double denom = tape.dc_mean + kDcEpsilon;
  for (int k = 0; k < k_count; ++k) {
    const double gain = tape.dc_gain[k];
    const double ratio = tape.dc_ratio[k];
    d_alpha += d_gain[k] * gain * std::log(ratio);
    const double d_ratio = d_gain[k] * params.alpha * gain / ratio;
    d_coeff[static_cast<size_t>(k) * bins] += d_ratio / denom;
    d_mean -= d_ratio * ratio / denom;
  }
  for (int k = 0; k < k_count; ++k) {
    d_coeff[static_cast<size_t>(k) * bins] += d_mean / k_count;
  }

  params_grad->alpha += d_alpha;
  params_grad->r += d_r;
  params_grad->p += d_p;

  std::vector<double> d_phase, d_phase_other;
  if (dft) {
    const std::vector<uint8_t> phase_mask = PhaseMask(params);
    const std::vector<double>& w = params.phase_weight[channel];
    std::vector<double>& d_w = params_grad->phase_weight[channel];
    d_phase.assign(total, 0.0);
    d_phase_other.assign(total, 0.0);
    for (size_t i = 0; i < total; ++i) {
      const int n = static_cast<int>(i % bins);
      if (!phase_mask[n]) continue;
      const double delta = WrapAngle(tape.phase[i] - tape.phase_other[i]);
      d_w[n] += upstream * std::abs(delta);
      // Subgradient 0 at delta = 0 and |delta| = pi.
      if (delta == 0.0 || delta == kPi) continue;
      const double g = upstream * w[n] * Sign(delta);
      d_phase[i] += g;
      d_phase_other[i] -= g;
    }
  }

  if (inputs == nullptr) return;

  const int b = tape.block_size;
  const int bb = b * b;
  std::vector<double> block_grad(bb), block_grad_other(bb);
  std::vector<double> g_re(bins), g_im(bins), g_re2(bins), g_im2(bins);
  for (int k = 0; k < k_count; ++k) {
    const size_t off = static_cast<size_t>(k) * bins;
    if (!dft) {
      Dct2BlockAdjoint(std::span(d_coeff).subspan(off, bins), block_grad, b);
      Dct2BlockAdjoint(std::span(d_coeff_other).subspan(off, bins),
                       block_grad_other, b);
    } else {
      for (int n = 0; n < bins; ++n) {
        const size_t i = off + n;
        for (int side = 0; side < 2; ++side) {
          const double re = side == 0 ? tape.re[i] : tape.re_other[i];
          const double im = side == 0 ? tape.im[i] : tape.im_other[i];
          const double a = side == 0 ? tape.coeff[i] : tape.coeff_other[i];
          const double da = side == 0 ? d_coeff[i] : d_coeff_other[i];
          const double dphi = side == 0 ? d_phase[i] : d_phase_other[i];
          double gr = 0.0, gi = 0.0;
          if (a > 0.0) {
            gr += da * re / a;
            gi += da * im / a;
          }
          if (a >= kZeroAmplitude && dphi != 0.0) {
            gr -= dphi * im / (a * a);
            gi += dphi * re / (a * a);
          }
          (side == 0 ? g_re : g_re2)[n] = gr;
          (side == 0 ? g_im : g_im2)[n] = gi;
        }
      }
      Rdft2BlockAdjoint(g_re, g_im, block_grad, b);
      Rdft2BlockAdjoint(g_re2, g_im2, block_grad_other, b);
    }
    const auto src = std::span(tape.source).subspan(k * bb, bb);
    ScatterAddBlocks(block_grad, src, inputs->first);
    ScatterAddBlocks(block_grad_other, src, inputs->second);
  }
}

double WatsonDctDistance(std::span<const double> x, std::span<const double> x2,
                         int height, int width, const WatsonParams& params,
                         int channel, const BlockGrid& grid) {
  if (params.variant != WatsonVariant::kDct) {
    throw InputError("WatsonDctDistance needs DCT-variant parameters");
  }
  return ForwardChannel(x, x2, height, width, params, channel, grid).value;
}

DftDistance WatsonDftDistance(std::span<const double> x,
                              std::span<const double> x2, int height,
                              int width, const WatsonParams& params,
                              int channel, const BlockGrid& grid) {
  if (params.variant != WatsonVariant::kDft) {
    throw InputError("WatsonDftDistance needs DFT-variant parameters");
  }
  const ChannelTape tape =
      ForwardChannel(x, x2, height, width, params, channel, grid);
  return {tape.amplitude_term, tape.phase_term};
}

double ColorAggregate(const ChannelLoss& loss_fn, const Image& x,
                      const Image& x2, std::span<const double> lambda) {
  CheckSameShape(x, x2, "ColorAggregate");
  if (x.channels() != 3 || lambda.size() != 3) {
    throw InputError("ColorAggregate needs 3-channel inputs and 3 weights, got " +
                     std::to_string(x.channels()) + " channel(s)");
  }
  double total = 0.0;
  for (int c = 0; c < 3; ++c) total += lambda[c] * loss_fn(c, x.plane(c), x2.plane(c));
  return total;
}

Image ToWatsonSpace(const Image& img, const WatsonParams& params) {
  if (params.channels == WatsonChannels::kGrey) return ToGrey(img);
  switch (img.space()) {
    case ColorSpace::kYCbCr:
      return img;
    case ColorSpace::kRgb:
      return RgbToYCbCr(img);
    case ColorSpace::kGrey:
      break;
  }
  throw InputError("YCbCr Watson parameters need a colour image, got grey");
}

WatsonResult WatsonDistance(const Image& x, const Image& x2,
                            const WatsonParams& params, const BlockGrid& grid) {
  CheckSameShape(x, x2, "WatsonDistance");
  const Image a = ToWatsonSpace(x, params);
  const Image b = ToWatsonSpace(x2, params);
  WatsonResult result;
  for (int c = 0; c < params.channel_count(); ++c) {
    const ChannelTape tape = ForwardChannel(a.plane(c), b.plane(c), a.height(),
                                            a.width(), params, c, grid);
    result.channel_values.push_back(tape.value);
    if (params.variant == WatsonVariant::kDft) {
      result.amplitude_terms.push_back(tape.amplitude_term);
      result.phase_terms.push_back(tape.phase_term);
    }
    result.value += params.lambda[c] * tape.value;
  }
  return result;
}

}  // namespace watson
