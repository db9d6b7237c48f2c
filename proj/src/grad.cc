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

#include "watson/grad.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "watson/color.h"
#include "watson/errors.h"
#include "watson/loss.h"

namespace watson {
namespace {

double Logit(double v) { return std::log(v / (1.0 - v)); }
double Sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Pulls a gradient computed in the Watson colorspace back onto the caller's
// image colorspace.
Image GradientToInputSpace(const Image& original, const Image& grad,
                           const WatsonParams& params) {
  if (params.channels == WatsonChannels::kYCbCr) {
    return original.space() == ColorSpace::kRgb ? YCbCrGradientToRgb(grad)
                                                : grad;
  }
  switch (original.space()) {
    case ColorSpace::kGrey:
      return grad;
    case ColorSpace::kRgb:
      return GreyGradientToRgb(grad);
    case ColorSpace::kYCbCr: {
      Image out(original.height(), original.width(), ColorSpace::kYCbCr);
      std::copy(grad.plane(0).begin(), grad.plane(0).end(),
                out.plane(0).begin());
      return out;
    }
  }
  return grad;
}

struct WatsonBackward {
  double value = 0.0;
  std::vector<double> free_grad;
  Image first, second;
};

WatsonBackward RunWatsonBackward(const WatsonParams& params, const Image& x,
                                 const Image& x2, const BlockGrid& grid,
                                 bool want_params, bool want_inputs) {
  CheckSameShape(x, x2, "WatsonDistance");
  const Image a = ToWatsonSpace(x, params);
  const Image b = ToWatsonSpace(x2, params);
  ParamGradient pg(params);
  Image ga, gb;
  if (want_inputs) {
    ga = Image(a.height(), a.width(), a.space());
    gb = Image(a.height(), a.width(), a.space());
  }
  WatsonBackward out;
  for (int c = 0; c < params.channel_count(); ++c) {
    const ChannelTape tape = ForwardChannel(a.plane(c), b.plane(c), a.height(),
                                            a.width(), params, c, grid);
    out.value += params.lambda[c] * tape.value;
    pg.lambda[c] += tape.value;
    InputGradient ig;
    if (want_inputs) {
      ig.first.assign(a.plane_size(), 0.0);
      ig.second.assign(a.plane_size(), 0.0);
    }
    BackpropChannel(tape, params, c, params.lambda[c], &pg,
                    want_inputs ? &ig : nullptr);
    if (want_inputs) {
      std::copy(ig.first.begin(), ig.first.end(), ga.plane(c).begin());
      std::copy(ig.second.begin(), ig.second.end(), gb.plane(c).begin());
    }
  }
  if (want_params) {
    const FreeLayout layout(params);
    std::vector<double>& g = out.free_grad;
    g.assign(layout.size, 0.0);
    g[layout.alpha] = pg.alpha;
    g[layout.r] = pg.r * params.r * (1.0 - params.r);
    g[layout.p] = pg.p * (params.p - 1.0);
    for (size_t c = 0; c < layout.lambda_count; ++c) {
      g[layout.lambda + c] = pg.lambda[c] * params.lambda[c];
    }
    const size_t bins = params.bins();
    for (int c = 0; c < params.channel_count(); ++c) {
      for (size_t n = 0; n < bins; ++n) {
        g[layout.sensitivity + c * bins + n] =
            pg.sensitivity[c][n] * params.sensitivity[c][n];
        if (params.variant == WatsonVariant::kDft) {
          g[layout.phase_weight + c * bins + n] =
              pg.phase_weight[c][n] * params.phase_weight[c][n];
        }
      }
    }
    g[layout.gamma] = 0.0;  // the head slope does not enter the distance
  }
  if (want_inputs) {
    out.first = GradientToInputSpace(x, ga, params);
    out.second = GradientToInputSpace(x2, gb, params);
  }
  return out;
}

int8_t PhaseCode(double delta) {
  if (delta == 0.0) return 0;
  if (delta == std::numbers::pi) return 2;
  return delta > 0.0 ? 1 : -1;
}

int8_t SignCode(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

}  // namespace

FreeLayout::FreeLayout(const WatsonParams& params) {
  lambda_count =
      params.channels == WatsonChannels::kYCbCr ? params.channel_count() : 0;
  const size_t tables = static_cast<size_t>(params.channel_count()) * params.bins();
  sensitivity = lambda + lambda_count;
  phase_weight = sensitivity + tables;
  gamma = phase_weight + (params.variant == WatsonVariant::kDft ? tables : 0);
  size = gamma + 1;
}

std::vector<double> ToUnconstrained(const WatsonParams& params) {
  params.Validate();
  const FreeLayout layout(params);
  std::vector<double> free(layout.size);
  free[layout.alpha] = params.alpha;
  free[layout.r] = Logit(params.r);
  free[layout.p] = std::log(params.p - 1.0);
  for (size_t c = 0; c < layout.lambda_count; ++c) {
    free[layout.lambda + c] = std::log(params.lambda[c]);
  }
  const size_t bins = params.bins();
  for (int c = 0; c < params.channel_count(); ++c) {
    for (size_t n = 0; n < bins; ++n) {
      free[layout.sensitivity + c * bins + n] =
          std::log(params.sensitivity[c][n]);
      if (params.variant == WatsonVariant::kDft) {
        free[layout.phase_weight + c * bins + n] =
            std::log(params.phase_weight[c][n]);
      }
    }
  }
  free[layout.gamma] = std::log(params.gamma);
  return free;
}

WatsonParams FromUnconstrained(const WatsonParams& shape,
                               std::span<const double> free) {
  const FreeLayout layout(shape);
  if (free.size() != layout.size) {
    throw InputError("free vector has " + std::to_string(free.size()) +
                     " entries, expected " + std::to_string(layout.size));
  }
  WatsonParams params = shape;
  params.alpha = free[layout.alpha];
  params.r = Sigmoid(free[layout.r]);
  params.p = 1.0 + std::exp(free[layout.p]);
  if (layout.lambda_count > 0) {
    for (size_t c = 0; c < layout.lambda_count; ++c) {
      params.lambda[c] = std::exp(free[layout.lambda + c]);
    }
  }
  const size_t bins = params.bins();
  for (int c = 0; c < params.channel_count(); ++c) {
    for (size_t n = 0; n < bins; ++n) {
      params.sensitivity[c][n] = std::exp(free[layout.sensitivity + c * bins + n]);
      if (params.variant == WatsonVariant::kDft) {
        params.phase_weight[c][n] =
            std::exp(free[layout.phase_weight + c * bins + n]);
      }
    }
  }
  params.gamma = std::exp(free[layout.gamma]);
  return params;
}

GradientResult ValueAndGrad(const GradientRequest& request,
                            const Metric& metric, const Image& x,
                            const Image& x2) {
  GradientResult result;
  if (metric.is_watson()) {
    const bool want_params = request.wrt == GradTarget::kParams;
    WatsonBackward wb = RunWatsonBackward(metric.watson, x, x2, request.grid,
                                          want_params, !want_params);
    result.value = wb.value;
    if (want_params) {
      result.gradient = std::move(wb.free_grad);
    } else {
      result.gradient = request.wrt == GradTarget::kFirstInput
                            ? std::move(wb.first.pixels())
                            : std::move(wb.second.pixels());
    }
    return result;
  }
  if (request.wrt == GradTarget::kParams) {
    // SSIM and Lp have no trainable parameters.
    result.value = Distance(metric, x, x2, request.grid);
    return result;
  }
  InputGradients ig = ValueAndInputGrads(metric, x, x2, request.grid);
  result.value = ig.value;
  result.gradient = request.wrt == GradTarget::kFirstInput
                        ? std::move(ig.first.pixels())
                        : std::move(ig.second.pixels());
  return result;
}

InputGradients ValueAndInputGrads(const Metric& metric, const Image& x,
                                  const Image& x2, const BlockGrid& grid) {
  InputGradients out;
  switch (metric.kind) {
    case MetricKind::kWatsonDct:
    case MetricKind::kWatsonDft: {
      WatsonBackward wb =
          RunWatsonBackward(metric.watson, x, x2, grid, false, true);
      out.value = wb.value;
      out.first = std::move(wb.first);
      out.second = std::move(wb.second);
      break;
    }
    case MetricKind::kSsim:
      out.value = SsimDistanceGrad(x, x2, metric.ssim, &out.first, &out.second);
      break;
    case MetricKind::kLp:
      out.value =
          LpDistanceGrad(x, x2, metric.lp_exponent, &out.first, &out.second);
      break;
  }
  for (const Image* g : {&out.first, &out.second}) {
    for (double v : g->pixels()) {
      if (!std::isfinite(v)) {
        throw NumericalError("non-finite input gradient from " + metric.Name());
      }
    }
  }
  return out;
}

std::vector<int8_t> KinkSignature(const Metric& metric, const Image& x,
                                  const Image& x2, const BlockGrid& grid) {
  std::vector<int8_t> sig;
  if (metric.kind == MetricKind::kLp) {
    if (metric.lp_exponent <= 1.0) {
      for (size_t i = 0; i < x.size(); ++i) {
        sig.push_back(SignCode(x.pixels()[i] - x2.pixels()[i]));
      }
    }
    return sig;
  }
  if (!metric.is_watson()) return sig;

  const WatsonParams& params = metric.watson;
  const Image a = ToWatsonSpace(x, params);
  const Image b = ToWatsonSpace(x2, params);
  const bool dft = params.variant == WatsonVariant::kDft;
  const std::vector<uint8_t>& valid = HalfSpectrumValidMask(params.block_size);
  const std::vector<BinKind>& kinds = HalfSpectrumKinds(params.block_size);
  for (int c = 0; c < params.channel_count(); ++c) {
    const ChannelTape tape = ForwardChannel(a.plane(c), b.plane(c), a.height(),
                                            a.width(), params, c, grid);
    const size_t total = tape.coeff.size();
    for (size_t i = 0; i < total; ++i) {
      const size_t n = i % tape.bins;
      if (!dft) {
        sig.push_back(SignCode(tape.coeff[i]));
        continue;
      }
      if (!valid[n]) continue;
      sig.push_back(tape.coeff[i] < kZeroAmplitude);
      sig.push_back(tape.coeff_other[i] < kZeroAmplitude);
      if (kinds[n] == BinKind::kSelfConjugate) {
        sig.push_back(SignCode(tape.re[i]));
        sig.push_back(SignCode(tape.re_other[i]));
      }
      if (n != 0) {
        sig.push_back(PhaseCode(WrapAngle(tape.phase[i] - tape.phase_other[i])));
      }
    }
  }
  return sig;
}

FiniteDiffReport FiniteDiffCheck(const GradientRequest& request,
                                 const Metric& metric, const Image& x,
                                 const Image& x2, double step, double rtol) {
  if (!(step > 0.0)) throw InputError("finite-difference step must be > 0");
  const GradientResult analytic = ValueAndGrad(request, metric, x, x2);
  const size_t n = analytic.gradient.size();
  std::vector<size_t> coords(n);
  std::iota(coords.begin(), coords.end(), size_t{0});
  if (n > kMaxCheckedCoordinates) {
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL ^ n);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(kMaxCheckedCoordinates);
    std::sort(coords.begin(), coords.end());
  }

  const std::vector<int8_t> base_sig = KinkSignature(metric, x, x2, request.grid);
  std::vector<double> free;
  if (request.wrt == GradTarget::kParams && metric.is_watson()) {
    free = ToUnconstrained(metric.watson);
  }

  // Returns the distance and whether the evaluation stayed on the same
  // smooth piece as the base point.
  auto evaluate = [&](size_t coord, double delta) -> std::pair<double, bool> {
    if (request.wrt == GradTarget::kParams) {
      std::vector<double> moved = free;
      moved[coord] += delta;
      Metric m = metric;
      m.watson = FromUnconstrained(metric.watson, moved);
      // Kinks live in the input-dependent nodes only.
      return {Distance(m, x, x2, request.grid), true};
    }
    Image a = x, b = x2;
    Image& target = request.wrt == GradTarget::kFirstInput ? a : b;
    double& pixel = target.pixels()[coord];
    const double origin = pixel;
    // Curvature blows up next to a kink, so the probe reaches well past the
    // stencil itself.
    pixel = origin + kKinkMargin * delta;
    const bool smooth = KinkSignature(metric, a, b, request.grid) == base_sig;
    pixel = origin + delta;
    return {Distance(metric, a, b, request.grid),
            smooth && KinkSignature(metric, a, b, request.grid) == base_sig};
  };

  FiniteDiffReport report;
  for (size_t coord : coords) {
    const auto [plus, plus_smooth] = evaluate(coord, step);
    const auto [minus, minus_smooth] = evaluate(coord, -step);
    if (!plus_smooth || !minus_smooth) {
      ++report.excluded;
      continue;
    }
    const double numeric = (plus - minus) / (2.0 * step);
    const double a = analytic.gradient[coord];
    const double rel =
        std::abs(a - numeric) / (std::abs(a) + std::abs(numeric) + 1e-12);
    ++report.checked;
    // A difference quotient cannot resolve changes below the rounding error
    // of the two distance values it is built from.
    const double floor = kRoundoffUlps * std::numeric_limits<double>::epsilon() *
                         std::max(std::abs(plus), std::abs(minus)) / step;
    if (rel >= rtol && std::abs(a - numeric) <= floor) {
      ++report.below_resolution;
      continue;
    }
    if (rel > report.max_rel_err) {
      report.max_rel_err = rel;
      report.worst_coordinate = coord;
    }
  }
  report.passed = report.max_rel_err < rtol;
  return report;
}

}  // namespace watson
