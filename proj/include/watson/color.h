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

#ifndef WATSON_COLOR_H_
#define WATSON_COLOR_H_

#include <array>

#include "watson/image.h"

namespace watson {

using Matrix3 = std::array<std::array<double, 3>, 3>;

// Full-range BT.601 luma/chroma matrix (rows Y, Cb, Cr; columns R, G, B).
// The +0.5 chroma offset is applied separately.
const Matrix3& RgbToYCbCrMatrix();
const Matrix3& YCbCrToRgbMatrix();

// Full-range BT.601. Output is clamped to [0, 1].
Image RgbToYCbCr(const Image& rgb);
Image YCbCrToRgb(const Image& ycbcr);

// Luma plane of an RGB or YCbCr image; grey images are returned as-is.
Image ToGrey(const Image& img);

// Maps a gradient with respect to YCbCr planes back onto RGB planes
// (transpose of the linear part; clamping is treated as inactive).
Image YCbCrGradientToRgb(const Image& grad_ycbcr);

// Same for the grey (luma) extraction.
Image GreyGradientToRgb(const Image& grad_grey);

}  // namespace watson

#endif  // WATSON_COLOR_H_
