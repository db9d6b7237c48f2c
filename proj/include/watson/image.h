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

#ifndef WATSON_IMAGE_H_
#define WATSON_IMAGE_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace watson {

enum class ColorSpace { kGrey, kRgb, kYCbCr };

std::string ColorSpaceName(ColorSpace space);

// Planar H x W x C image with real intensities in [0, 1]. Chroma planes of
// YCbCr images carry a +0.5 offset so every channel shares that range.
class Image {
 public:
  Image() = default;
  Image(int height, int width, ColorSpace space);
  Image(int height, int width, ColorSpace space, std::vector<double> pixels);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return space_ == ColorSpace::kGrey ? 1 : 3; }
  ColorSpace space() const { return space_; }
  size_t plane_size() const { return static_cast<size_t>(height_) * width_; }
  size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }

  double& at(int c, int y, int x) {
    return pixels_[c * plane_size() + static_cast<size_t>(y) * width_ + x];
  }
  double at(int c, int y, int x) const {
    return pixels_[c * plane_size() + static_cast<size_t>(y) * width_ + x];
  }

  std::span<double> plane(int c) {
    return {pixels_.data() + c * plane_size(), plane_size()};
  }
  std::span<const double> plane(int c) const {
    return {pixels_.data() + c * plane_size(), plane_size()};
  }

  std::vector<double>& pixels() { return pixels_; }
  const std::vector<double>& pixels() const { return pixels_; }

  // "HxWxC" for diagnostics.
  std::string ShapeString() const;

 private:
  int height_ = 0;
  int width_ = 0;
  ColorSpace space_ = ColorSpace::kGrey;
  std::vector<double> pixels_;
};

bool SameShape(const Image& a, const Image& b);

// Throws InputError naming both shapes unless a and b have equal dimensions
// and channel counts.
void CheckSameShape(const Image& a, const Image& b, const char* context);

}  // namespace watson

#endif  // WATSON_IMAGE_H_
