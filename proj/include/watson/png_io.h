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

#ifndef WATSON_PNG_IO_H_
#define WATSON_PNG_IO_H_

#include <filesystem>

#include "watson/image.h"

namespace watson {

// Reads an 8- or 16-bit PNG into [0, 1] reals. Grey(+alpha) becomes kGrey,
// everything else kRgb; alpha is dropped. Throws DataError.
Image ReadPng(const std::filesystem::path& path);

// bit_depth is 8 or 16. YCbCr images are converted to RGB first.
void WritePng(const std::filesystem::path& path, const Image& img,
              int bit_depth = 16);

}  // namespace watson

#endif  // WATSON_PNG_IO_H_
