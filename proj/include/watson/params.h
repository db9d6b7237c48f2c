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

#ifndef WATSON_PARAMS_H_
#define WATSON_PARAMS_H_

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "watson/transforms.h"

namespace watson {

enum class WatsonVariant { kDct, kDft };
enum class WatsonChannels { kGrey, kYCbCr };

std::string VariantName(WatsonVariant v);
std::string ChannelsName(WatsonChannels c);

// Every trainable quantity of the Watson distance, in natural (constrained)
// space. Tables are stored flat per channel: B x B for the DCT variant and
// B x (B/2 + 1) half-spectrum layout for the DFT variant, where duplicate
// bins are carried along but never read.
struct WatsonParams {
  WatsonVariant variant = WatsonVariant::kDft;
  WatsonChannels channels = WatsonChannels::kGrey;
  int block_size = kBlockSize;

  double alpha = 0.649;    // luminance masking exponent
  double r = 0.7;          // contrast masking exponent, in [0, 1]
  double p = 4.0;          // pooling norm, > 1
  double epsilon = 1e-10;  // added under the p-th root; not trained

  std::vector<std::vector<double>> sensitivity;   // T, one table per channel
  std::vector<std::vector<double>> phase_weight;  // w, DFT only
  std::vector<double> lambda;                     // one per channel
  double gamma = 1.0;  // slope of the 2AFC ranking head

  int channel_count() const {
    return channels == WatsonChannels::kGrey ? 1 : 3;
  }
  int bins() const;
  int table_cols() const;

  // Throws InputError on any violated constraint.
  void Validate() const;
};

// Radially increasing B x B threshold table in [0, 1] pixel units for the
// orthonormal DCT: the d.c. entry is the smallest (most sensitive) and
// thresholds grow exponentially with radial frequency, spanning roughly the
// 1.4 .. 21 (out of 255) range of the classical Watson table.
std::vector<double> DefaultSensitivityTable(int block_size = kBlockSize);

// Same profile mapped onto the unnormalized half-spectrum layout.
std::vector<double> DefaultDftSensitivityTable(int block_size = kBlockSize);

inline constexpr double kDefaultPhaseWeight = 0.02;

WatsonParams DefaultWatsonParams(WatsonVariant variant,
                                 WatsonChannels channels);

nlohmann::json ParamsToJson(const WatsonParams& params);
// Throws DataError for malformed documents or violated constraints.
WatsonParams ParamsFromJson(const nlohmann::json& doc);

void SaveParams(const std::filesystem::path& path, const WatsonParams& params);
WatsonParams LoadParams(const std::filesystem::path& path);

}  // namespace watson

#endif  // WATSON_PARAMS_H_
