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

#include "watson/image.h"

#include "watson/errors.h"

namespace watson {

std::string ColorSpaceName(ColorSpace space) {
  switch (space) {
    case ColorSpace::kGrey:
      return "grey";
    case ColorSpace::kRgb:
      return "rgb";
    case ColorSpace::kYCbCr:
      return "ycbcr";
  }
  return "unknown";
}

Image::Image(int height, int width, ColorSpace space)
    : height_(height), width_(width), space_(space) {
  if (height <= 0 || width <= 0) {
    throw InputError("image dimensions must be positive, got " +
                     std::to_string(height) + "x" + std::to_string(width));
  }
  pixels_.assign(plane_size() * channels(), 0.0);
}

Image::Image(int height, int width, ColorSpace space, std::vector<double> pixels)
    : Image(height, width, space) {
  if (pixels.size() != pixels_.size()) {
    throw InputError("pixel buffer holds " + std::to_string(pixels.size()) +
                     " values, expected " + std::to_string(pixels_.size()));
  }
  pixels_ = std::move(pixels);
}

std::string Image::ShapeString() const {
  return std::to_string(height_) + "x" + std::to_string(width_) + "x" +
         std::to_string(channels());
}

bool SameShape(const Image& a, const Image& b) {
  return a.height() == b.height() && a.width() == b.width() &&
         a.channels() == b.channels();
}

void CheckSameShape(const Image& a, const Image& b, const char* context) {
  if (!SameShape(a, b)) {
    throw InputError(std::string(context) + ": dimension mismatch " +
                     a.ShapeString() + " vs " + b.ShapeString());
  }
}

}  // namespace watson
