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

#include "watson/png_io.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "watson/color.h"
#include "watson/errors.h"

namespace watson {
namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

}  // namespace

Image ReadPng(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw DataError("cannot open image " + path.string());

  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw DataError("not a PNG file: " + path.string());
  }

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("libpng initialization failed");
  }
  std::vector<png_bytep> rows;
  std::vector<png_byte> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("corrupt PNG: " + path.string());
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_set_strip_alpha(png);
  }
  if (bit_depth == 16) png_set_swap(png);  // little-endian host order
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  const int depth = png_get_bit_depth(png, info);
  const size_t row_bytes = png_get_rowbytes(png, info);
  buffer.resize(row_bytes * height);
  rows.resize(height);
  for (int y = 0; y < height; ++y) rows[y] = buffer.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const ColorSpace space = channels == 1 ? ColorSpace::kGrey : ColorSpace::kRgb;
  Image img(height, width, space);
  const double scale = depth == 16 ? 1.0 / 65535.0 : 1.0 / 255.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        const size_t idx = static_cast<size_t>(x) * channels + c;
        double v;
        if (depth == 16) {
          const auto* p = reinterpret_cast<const uint16_t*>(rows[y]);
          v = p[idx];
        } else {
          v = rows[y][idx];
        }
        img.at(c, y, x) = v * scale;
      }
    }
  }
  return img;
}

void WritePng(const std::filesystem::path& path, const Image& img,
              int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw InputError("PNG bit depth must be 8 or 16");
  }
  const Image& src =
      img.space() == ColorSpace::kYCbCr ? YCbCrToRgb(img) : img;
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw DataError("cannot write image " + path.string());

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("libpng initialization failed");
  }
  // Pack rows before setjmp so no locals are modified across the jump.
  const int channels = src.channels();
  const size_t bytes_per_sample = bit_depth / 8;
  const double max_value = bit_depth == 16 ? 65535.0 : 255.0;
  const size_t row_bytes = static_cast<size_t>(src.width()) * channels *
                           bytes_per_sample;
  std::vector<png_byte> buffer(row_bytes * src.height());
  std::vector<png_bytep> rows(src.height());
  for (int y = 0; y < src.height(); ++y) {
    png_bytep row = buffer.data() + y * row_bytes;
    rows[y] = row;
    for (int x = 0; x < src.width(); ++x) {
      for (int c = 0; c < channels; ++c) {
        const double v = std::clamp(src.at(c, y, x), 0.0, 1.0);
        const auto q = static_cast<unsigned>(std::lround(v * max_value));
        const size_t idx = (static_cast<size_t>(x) * channels + c) *
                           bytes_per_sample;
        if (bit_depth == 16) {
          row[idx] = static_cast<png_byte>(q >> 8);  // PNG is big-endian
          row[idx + 1] = static_cast<png_byte>(q & 0xff);
        } else {
          row[idx] = static_cast<png_byte>(q);
        }
      }
    }
  }
  const int color_type =
      channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("failed writing PNG " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, src.width(), src.height(), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace watson
