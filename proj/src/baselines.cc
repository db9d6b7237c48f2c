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

#include "watson/baselines.h"

#include <cmath>
#include <string>

#include "watson/errors.h"

namespace watson {
namespace {

struct Moments {
  double mx = 0.0, my = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
};

// Weighted moments of the window at (top, left) of planes with row stride
// `width`.
Moments WindowMoments(std::span<const double> x, std::span<const double> y,
                      int width, int top, int left,
                      std::span<const double> weights, int size) {
  Moments m;
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      const double w = weights[i * size + j];
      const size_t idx = static_cast<size_t>(top + i) * width + left + j;
      m.mx += w * x[idx];
      m.my += w * y[idx];
    }
  }
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      const double w = weights[i * size + j];
      const size_t idx = static_cast<size_t>(top + i) * width + left + j;
      const double dx = x[idx] - m.mx, dy = y[idx] - m.my;
      m.sxx += w * dx * dx;
      m.syy += w * dy * dy;
      m.sxy += w * dx * dy;
    }
  }
  return m;
}

double SsimFromMoments(const Moments& m, double c1, double c2) {
  return ((2.0 * m.mx * m.my + c1) * (2.0 * m.sxy + c2)) /
         ((m.mx * m.mx + m.my * m.my + c1) * (m.sxx + m.syy + c2));
}

void CheckSsimInputs(const Image& x, const Image& x2, const SsimParams& params) {
  params.Validate();
  CheckSameShape(x, x2, "SsimDistance");
  if (x.height() < params.window_size || x.width() < params.window_size) {
    throw InputError("image " + x.ShapeString() + " is smaller than the " +
                     std::to_string(params.window_size) + "x" +
                     std::to_string(params.window_size) + " SSIM window");
  }
}

double SsimImpl(const Image& x, const Image& x2, const SsimParams& params,
                Image* grad_x, Image* grad_x2) {
  CheckSsimInputs(x, x2, params);
  const std::vector<double> weights = GaussianWindow(params);
  const int size = params.window_size;
  const int rows = x.height() - size + 1;
  const int cols = x.width() - size + 1;
  const double c1 = params.c1(), c2 = params.c2();
  const double per_window =
      1.0 / (static_cast<double>(rows) * cols * x.channels());
  const bool want_grad = grad_x != nullptr || grad_x2 != nullptr;
  Image gx, gy;
  if (want_grad) {
    gx = Image(x.height(), x.width(), x.space());
    gy = Image(x.height(), x.width(), x.space());
  }

  double total = 0.0;
  for (int c = 0; c < x.channels(); ++c) {
    const auto px = x.plane(c), py = x2.plane(c);
    double channel_sum = 0.0;
    for (int top = 0; top < rows; ++top) {
      for (int left = 0; left < cols; ++left) {
        const Moments m = WindowMoments(px, py, x.width(), top, left, weights, size);
        const double ssim = SsimFromMoments(m, c1, c2);
        channel_sum += ssim;
        if (!want_grad) continue;

        const double a1 = 2.0 * m.mx * m.my + c1, a2 = 2.0 * m.sxy + c2;
        const double b1 = m.mx * m.mx + m.my * m.my + c1;
        const double b2 = m.sxx + m.syy + c2;
        const double d_mx = 2.0 * m.my * a2 / (b1 * b2) - ssim * 2.0 * m.mx / b1;
        const double d_my = 2.0 * m.mx * a2 / (b1 * b2) - ssim * 2.0 * m.my / b1;
        const double d_sxy = 2.0 * a1 / (b1 * b2);
        const double d_var = -ssim / b2;
        // distance = 1 - mean(ssim)
        const double up = -per_window;
        auto gxp = gx.plane(c), gyp = gy.plane(c);
        for (int i = 0; i < size; ++i) {
          for (int j = 0; j < size; ++j) {
            const double w = weights[i * size + j];
            const size_t idx =
                static_cast<size_t>(top + i) * x.width() + left + j;
            const double dx = px[idx] - m.mx, dy = py[idx] - m.my;
            gxp[idx] += up * w * (d_mx + 2.0 * d_var * dx + d_sxy * dy);
            gyp[idx] += up * w * (d_my + 2.0 * d_var * dy + d_sxy * dx);
          }
        }
      }
    }
    total += channel_sum / (static_cast<double>(rows) * cols);
  }
  if (grad_x) *grad_x = std::move(gx);
  if (grad_x2) *grad_x2 = std::move(gy);
  return 1.0 - total / x.channels();
}

double LpImpl(const Image& x, const Image& x2, double p, Image* grad_x,
              Image* grad_x2) {
  CheckSameShape(x, x2, "LpDistance");
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw InputError("Lp exponent must be >= 1");
  }
  const auto& a = x.pixels();
  const auto& b = x2.pixels();
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) sum += std::pow(std::abs(a[i] - b[i]), p);
  const double value = std::pow(sum, 1.0 / p);
  if (grad_x || grad_x2) {
    Image gx(x.height(), x.width(), x.space());
    Image gy(x.height(), x.width(), x.space());
    if (value > 0.0) {
      // d/dx_i = |d_i|^(p-1) sign(d_i) / value^(p-1)
      const double scale = std::pow(value, 1.0 - p);
      for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (d == 0.0) continue;
        const double g = std::pow(std::abs(d), p - 1.0) * (d > 0 ? 1.0 : -1.0) * scale;
        gx.pixels()[i] = g;
        gy.pixels()[i] = -g;
      }
    }
    if (grad_x) *grad_x = std::move(gx);
    if (grad_x2) *grad_x2 = std::move(gy);
  }
  return value;
}

}  // namespace

void SsimParams::Validate() const {
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw InputError("SSIM k1, k2 must be > 0");
  if (window_size < 3 || window_size % 2 == 0) {
    throw InputError("SSIM window size must be odd and >= 3");
  }
  if (!(window_sigma > 0.0)) throw InputError("SSIM window sigma must be > 0");
  if (!(dynamic_range > 0.0)) throw InputError("SSIM dynamic range must be > 0");
}

std::vector<double> GaussianWindow(const SsimParams& params) {
  const int size = params.window_size;
  const int half = size / 2;
  std::vector<double> g(size);
  double norm = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - half;
    g[i] = std::exp(-d * d / (2.0 * params.window_sigma * params.window_sigma));
    norm += g[i];
  }
  std::vector<double> w(static_cast<size_t>(size) * size);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) w[i * size + j] = g[i] * g[j] / (norm * norm);
  }
  return w;
}

double SsimBlock(std::span<const double> x, std::span<const double> y,
                 std::span<const double> weights, const SsimParams& params) {
  if (x.size() != weights.size() || y.size() != weights.size()) {
    throw InputError("SSIM window and weights differ in size");
  }
  const int size = static_cast<int>(std::lround(std::sqrt(weights.size())));
  const Moments m = WindowMoments(x, y, size, 0, 0, weights, size);
  return SsimFromMoments(m, params.c1(), params.c2());
}

double SsimDistance(const Image& x, const Image& x2, const SsimParams& params) {
  return SsimImpl(x, x2, params, nullptr, nullptr);
}

double SsimDistanceGrad(const Image& x, const Image& x2,
                        const SsimParams& params, Image* grad_x,
                        Image* grad_x2) {
  return SsimImpl(x, x2, params, grad_x, grad_x2);
}

double LpDistance(const Image& x, const Image& x2, double p) {
  return LpImpl(x, x2, p, nullptr, nullptr);
}

double LpDistanceGrad(const Image& x, const Image& x2, double p, Image* grad_x,
                      Image* grad_x2) {
  return LpImpl(x, x2, p, grad_x, grad_x2);
}

}  // namespace watson
