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

#include "watson/color.h"

#include <algorithm>

#include "watson/errors.h"

namespace watson {
namespace {

constexpr double kKr = 0.299;
constexpr double kKb = 0.114;
constexpr double kKg = 1.0 - kKr - kKb;

Matrix3 MakeForward() {
  Matrix3 m{};
  m[0] = {kKr, kKg, kKb};
  const double cb = 0.5 / (1.0 - kKb);
  m[1] = {-kKr * cb, -kKg * cb, (1.0 - kKb) * cb};
  const double cr = 0.5 / (1.0 - kKr);
  m[2] = {(1.0 - kKr) * cr, -kKg * cr, -kKb * cr};
  return m;
}

Matrix3 Invert(const Matrix3& m) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  Matrix3 inv{};
  inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
  inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
  inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
  return inv;
}

double Clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void RequireThreeChannels(const Image& img, ColorSpace expected,
                          const char* op) {
  if (img.space() != expected || img.channels() != 3) {
    throw InputError(std::string(op) + ": expected " +
                     ColorSpaceName(expected) + " input, got " +
                     ColorSpaceName(img.space()) + " with " +
                     std::to_string(img.channels()) + " channel(s)");
  }
}

}  // namespace

const Matrix3& RgbToYCbCrMatrix() {
  static const Matrix3 m = MakeForward();
  return m;
}

const Matrix3& YCbCrToRgbMatrix() {
  static const Matrix3 m = Invert(RgbToYCbCrMatrix());
  return m;
}

Image RgbToYCbCr(const Image& rgb) {
  RequireThreeChannels(rgb, ColorSpace::kRgb, "RgbToYCbCr");
  const Matrix3& m = RgbToYCbCrMatrix();
  Image out(rgb.height(), rgb.width(), ColorSpace::kYCbCr);
  const auto r = rgb.plane(0), g = rgb.plane(1), b = rgb.plane(2);
  auto y = out.plane(0), cb = out.plane(1), cr = out.plane(2);
  // Chroma rows sum to zero; writing them over channel differences makes
  // R = G = B give exactly 0.5.
  for (size_t i = 0; i < rgb.plane_size(); ++i) {
    y[i] = Clamp01(m[0][0] * r[i] + m[0][1] * g[i] + m[0][2] * b[i]);
    cb[i] = Clamp01(-m[1][0] * (b[i] - r[i]) - m[1][1] * (b[i] - g[i]) + 0.5);
    cr[i] = Clamp01(-m[2][1] * (r[i] - g[i]) - m[2][2] * (r[i] - b[i]) + 0.5);
  }
  return out;
}

Image YCbCrToRgb(const Image& ycbcr) {
  RequireThreeChannels(ycbcr, ColorSpace::kYCbCr, "YCbCrToRgb");
  const Matrix3& m = YCbCrToRgbMatrix();
  Image out(ycbcr.height(), ycbcr.width(), ColorSpace::kRgb);
  const auto y = ycbcr.plane(0), cb = ycbcr.plane(1), cr = ycbcr.plane(2);
  for (size_t i = 0; i < ycbcr.plane_size(); ++i) {
    const double v[3] = {y[i], cb[i] - 0.5, cr[i] - 0.5};
    for (int c = 0; c < 3; ++c) {
      out.plane(c)[i] =
          Clamp01(m[c][0] * v[0] + m[c][1] * v[1] + m[c][2] * v[2]);
    }
  }
  return out;
}

Image ToGrey(const Image& img) {
  switch (img.space()) {
    case ColorSpace::kGrey:
      return img;
    case ColorSpace::kYCbCr: {
      std::vector<double> luma(img.plane(0).begin(), img.plane(0).end());
      return Image(img.height(), img.width(), ColorSpace::kGrey,
                   std::move(luma));
    }
    case ColorSpace::kRgb: {
      const Image ycc = RgbToYCbCr(img);
      std::vector<double> luma(ycc.plane(0).begin(), ycc.plane(0).end());
      return Image(img.height(), img.width(), ColorSpace::kGrey,
                   std::move(luma));
    }
  }
  throw InputError("ToGrey: unknown colorspace");
}

Image YCbCrGradientToRgb(const Image& grad_ycbcr) {
  const Matrix3& m = RgbToYCbCrMatrix();
  Image out(grad_ycbcr.height(), grad_ycbcr.width(), ColorSpace::kRgb);
  for (size_t i = 0; i < grad_ycbcr.plane_size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) acc += m[k][c] * grad_ycbcr.plane(k)[i];
      out.plane(c)[i] = acc;
    }
  }
  return out;
}

Image GreyGradientToRgb(const Image& grad_grey) {
  const Matrix3& m = RgbToYCbCrMatrix();
  Image out(grad_grey.height(), grad_grey.width(), ColorSpace::kRgb);
  for (size_t i = 0; i < grad_grey.plane_size(); ++i) {
    for (int c = 0; c < 3; ++c) out.plane(c)[i] = m[0][c] * grad_grey.plane(0)[i];
  }
  return out;
}

}  // namespace watson
