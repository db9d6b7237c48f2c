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

#include <gtest/gtest.h>

#include <random>

#include "watson/errors.h"

namespace watson {
namespace {

Image Pixel(ColorSpace space, double a, double b, double c) {
  return Image(1, 1, space, {a, b, c});
}

TEST(ColorTest, BlackAndWhiteMapToNeutralChroma) {
  Image black = RgbToYCbCr(Pixel(ColorSpace::kRgb, 0, 0, 0));
  EXPECT_EQ(black.pixels(), (std::vector<double>{0.0, 0.5, 0.5}));
  Image white = RgbToYCbCr(Pixel(ColorSpace::kRgb, 1, 1, 1));
  EXPECT_NEAR(white.at(0, 0, 0), 1.0, 1e-15);
  EXPECT_NEAR(white.at(1, 0, 0), 0.5, 1e-15);
  EXPECT_NEAR(white.at(2, 0, 0), 0.5, 1e-15);
}

TEST(ColorTest, PureRedMatchesBt601FullRange) {
  // Y = 0.299, Cb = 0.5 - 0.5 * 0.299 / 0.886, Cr = 0.5 + 0.5.
  Image red = RgbToYCbCr(Pixel(ColorSpace::kRgb, 1, 0, 0));
  EXPECT_NEAR(red.at(0, 0, 0), 0.299, 1e-12);
  EXPECT_NEAR(red.at(1, 0, 0), 0.331264, 1e-6);
  EXPECT_NEAR(red.at(2, 0, 0), 1.0, 1e-12);
}

TEST(ColorTest, InverseOfBlackAndRed) {
  Image black = YCbCrToRgb(Pixel(ColorSpace::kYCbCr, 0, 0.5, 0.5));
  for (double v : black.pixels()) EXPECT_NEAR(v, 0.0, 1e-15);
  Image red = YCbCrToRgb(RgbToYCbCr(Pixel(ColorSpace::kRgb, 1, 0, 0)));
  EXPECT_NEAR(red.at(0, 0, 0), 1.0, 1e-12);
  EXPECT_NEAR(red.at(1, 0, 0), 0.0, 1e-12);
  EXPECT_NEAR(red.at(2, 0, 0), 0.0, 1e-12);
}

TEST(ColorTest, RoundTripIsIdentityForRandomRgb) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image rgb(16, 16, ColorSpace::kRgb);
  for (double& v : rgb.pixels()) v = u(rng);
  const Image back = YCbCrToRgb(RgbToYCbCr(rgb));
  for (size_t i = 0; i < rgb.size(); ++i) {
    EXPECT_NEAR(back.pixels()[i], rgb.pixels()[i], 1e-12);
  }
}

TEST(ColorTest, GreyInputsHaveExactNeutralChroma) {
  for (double g : {0.0, 0.1, 0.37, 0.5, 0.999, 1.0}) {
    Image out = RgbToYCbCr(Pixel(ColorSpace::kRgb, g, g, g));
    EXPECT_EQ(out.at(1, 0, 0), 0.5) << g;
    EXPECT_EQ(out.at(2, 0, 0), 0.5) << g;
  }
}

TEST(ColorTest, WrongColorspaceIsRejected) {
  EXPECT_THROW(RgbToYCbCr(Pixel(ColorSpace::kYCbCr, 0, 0.5, 0.5)), InputError);
  EXPECT_THROW(YCbCrToRgb(Pixel(ColorSpace::kRgb, 0, 0, 0)), InputError);
  EXPECT_THROW(RgbToYCbCr(Image(2, 2, ColorSpace::kGrey)), InputError);
}

TEST(ColorTest, ToGreyTakesLuma) {
  Image rgb = Pixel(ColorSpace::kRgb, 1, 0, 0);
  Image grey = ToGrey(rgb);
  ASSERT_EQ(grey.channels(), 1);
  EXPECT_NEAR(grey.at(0, 0, 0), 0.299, 1e-12);
}

TEST(ColorTest, GradientMappingIsTransposeOfForward) {
  // <M x, g> == <x, M^T g> for the linear part.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Image rgb(2, 2, ColorSpace::kRgb), g(2, 2, ColorSpace::kYCbCr);
  for (double& v : rgb.pixels()) v = u(rng);
  for (double& v : g.pixels()) v = u(rng) - 0.5;
  Image ycc = RgbToYCbCr(rgb);
  for (int c = 1; c < 3; ++c) {
    for (double& v : ycc.plane(c)) v -= 0.5;
  }
  double lhs = 0.0, rhs = 0.0;
  for (size_t i = 0; i < ycc.size(); ++i) lhs += ycc.pixels()[i] * g.pixels()[i];
  Image back = YCbCrGradientToRgb(g);
  for (size_t i = 0; i < rgb.size(); ++i) rhs += rgb.pixels()[i] * back.pixels()[i];
  EXPECT_NEAR(lhs, rhs, 1e-12);
}

}  // namespace
}  // namespace watson
