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

#include "watson/params.h"

#include <cmath>
#include <fstream>

#include "watson/errors.h"

namespace watson {
namespace {

constexpr double kDcThreshold = 1.40 / 255.0;
constexpr double kRadialGrowth = 0.27;

double RadialThreshold(double radius) {
  return kDcThreshold * std::exp(kRadialGrowth * radius);
}

using nlohmann::json;

std::vector<double> FlattenTable(const json& rows, int expect_rows,
                                 int expect_cols, const std::string& what) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != expect_rows) {
    throw DataError(what + ": expected " + std::to_string(expect_rows) +
                    " rows");
  }
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(expect_rows) * expect_cols);
  for (const json& row : rows) {
    if (!row.is_array() || static_cast<int>(row.size()) != expect_cols) {
      throw DataError(what + ": expected rows of " +
                      std::to_string(expect_cols) + " values");
    }
    for (const json& v : row) {
      if (!v.is_number()) throw DataError(what + ": non-numeric entry");
      flat.push_back(v.get<double>());
    }
  }
  return flat;
}

json NestTable(const std::vector<double>& flat, int cols) {
  json rows = json::array();
  for (size_t i = 0; i < flat.size(); i += cols) {
    rows.push_back(std::vector<double>(flat.begin() + i, flat.begin() + i + cols));
  }
  return rows;
}

double RequireNumber(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_number()) {
    throw DataError(std::string("params: missing numeric field '") + key + "'");
  }
  return doc[key].get<double>();
}

}  // namespace

std::string VariantName(WatsonVariant v) {
  return v == WatsonVariant::kDct ? "dct" : "dft";
}

std::string ChannelsName(WatsonChannels c) {
  return c == WatsonChannels::kGrey ? "grey" : "ycbcr";
}

int WatsonParams::table_cols() const {
  return variant == WatsonVariant::kDct ? block_size
                                        : HalfSpectrumWidth(block_size);
}

int WatsonParams::bins() const { return block_size * table_cols(); }

void WatsonParams::Validate() const {
  const int nc = channel_count();
  const size_t n = bins();
  if (block_size <= 0 || block_size % 2 != 0) {
    throw InputError("block size must be positive and even");
  }
  if (static_cast<int>(sensitivity.size()) != nc) {
    throw InputError("expected one sensitivity table per channel");
  }
  for (const auto& t : sensitivity) {
    if (t.size() != n) throw InputError("sensitivity table has wrong size");
    for (double v : t) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw InputError("sensitivity table entries must be positive");
      }
    }
  }
  if (variant == WatsonVariant::kDft) {
    if (static_cast<int>(phase_weight.size()) != nc) {
      throw InputError("expected one phase weight table per channel");
    }
    for (const auto& t : phase_weight) {
      if (t.size() != n) throw InputError("phase weight table has wrong size");
      for (double v : t) {
        if (!(v > 0.0) || !std::isfinite(v)) {
          throw InputError("phase weights must be positive");
        }
      }
    }
  } else if (!phase_weight.empty()) {
    throw InputError("phase weights are only defined for the DFT variant");
  }
  if (!std::isfinite(alpha)) throw InputError("alpha must be finite");
  if (!(r >= 0.0 && r <= 1.0)) throw InputError("r must lie in [0, 1]");
  if (!(p > 1.0) || !std::isfinite(p)) throw InputError("p must exceed 1");
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (static_cast<int>(lambda.size()) != nc) {
    throw InputError("expected one lambda per channel");
  }
  double lambda_sum = 0.0;
  for (double l : lambda) {
    if (!(l >= 0.0) || !std::isfinite(l)) {
      throw InputError("lambda weights must be non-negative");
    }
    lambda_sum += l;
  }
  if (!(lambda_sum > 0.0)) throw InputError("lambda weights sum to zero");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InputError("gamma must be positive");
  }
}

std::vector<double> DefaultSensitivityTable(int block_size) {
  std::vector<double> t(static_cast<size_t>(block_size) * block_size);
  for (int i = 0; i < block_size; ++i) {
    for (int j = 0; j < block_size; ++j) {
      t[i * block_size + j] = RadialThreshold(std::hypot(i, j));
    }
  }
  return t;
}

std::vector<double> DefaultDftSensitivityTable(int block_size) {
  // DFT bin u spans the frequency of DCT index 2u; the unnormalized DFT
  // is larger than the orthonormal DCT by about a factor B.
  const int hw = HalfSpectrumWidth(block_size);
  std::vector<double> t(static_cast<size_t>(block_size) * hw);
  for (int u = 0; u < block_size; ++u) {
    const int fu = std::min(u, block_size - u);
    for (int v = 0; v < hw; ++v) {
      t[u * hw + v] = block_size * RadialThreshold(2.0 * std::hypot(fu, v));
    }
  }
  return t;
}

WatsonParams DefaultWatsonParams(WatsonVariant variant,
                                 WatsonChannels channels) {
  WatsonParams params;
  params.variant = variant;
  params.channels = channels;
  const int nc = params.channel_count();
  const std::vector<double> table = variant == WatsonVariant::kDct
                                        ? DefaultSensitivityTable()
                                        : DefaultDftSensitivityTable();
  params.sensitivity.assign(nc, table);
  if (variant == WatsonVariant::kDft) {
    params.phase_weight.assign(nc,
                               std::vector<double>(table.size(), kDefaultPhaseWeight));
  }
  if (channels == WatsonChannels::kGrey) {
    params.lambda = {1.0};
  } else {
    params.lambda = {0.5, 0.25, 0.25};
  }
  return params;
}

json ParamsToJson(const WatsonParams& params) {
  json doc;
  doc["variant"] = VariantName(params.variant);
  doc["channels"] = ChannelsName(params.channels);
  doc["block_size"] = params.block_size;
  doc["p"] = params.p;
  doc["alpha"] = params.alpha;
  doc["r"] = params.r;
  doc["epsilon"] = params.epsilon;
  json tables = json::array();
  for (const auto& t : params.sensitivity) {
    tables.push_back(NestTable(t, params.table_cols()));
  }
  doc["T"] = tables;
  if (params.variant == WatsonVariant::kDft) {
    json weights = json::array();
    for (const auto& w : params.phase_weight) {
      weights.push_back(NestTable(w, params.table_cols()));
    }
    doc["w"] = weights;
  }
  doc["lambda"] = params.lambda;
  doc["gamma"] = params.gamma;
  return doc;
}

namespace {

WatsonParams ParseParams(const json& doc) {
  if (!doc.is_object()) throw DataError("params: expected a JSON object");
  WatsonParams params;
  const std::string variant = doc.value("variant", "");
  if (variant == "dct") {
    params.variant = WatsonVariant::kDct;
  } else if (variant == "dft") {
    params.variant = WatsonVariant::kDft;
  } else {
    throw DataError("params: variant must be \"dct\" or \"dft\"");
  }
  const std::string channels = doc.value("channels", "");
  if (channels == "grey") {
    params.channels = WatsonChannels::kGrey;
  } else if (channels == "ycbcr") {
    params.channels = WatsonChannels::kYCbCr;
  } else {
    throw DataError("params: channels must be \"grey\" or \"ycbcr\"");
  }
  if (doc.contains("block_size")) {
    params.block_size = doc["block_size"].get<int>();
  }
  params.p = RequireNumber(doc, "p");
  params.alpha = RequireNumber(doc, "alpha");
  params.r = RequireNumber(doc, "r");
  params.epsilon = RequireNumber(doc, "epsilon");
  params.gamma = doc.contains("gamma") ? RequireNumber(doc, "gamma") : 1.0;

  const int nc = params.channel_count();
  if (!doc.contains("T") || !doc["T"].is_array() ||
      static_cast<int>(doc["T"].size()) != nc) {
    throw DataError("params: T must hold one table per channel");
  }
  for (const json& t : doc["T"]) {
    params.sensitivity.push_back(
        FlattenTable(t, params.block_size, params.table_cols(), "params: T"));
  }
  if (params.variant == WatsonVariant::kDft) {
    if (!doc.contains("w") || !doc["w"].is_array() ||
        static_cast<int>(doc["w"].size()) != nc) {
      throw DataError("params: w must hold one table per channel");
    }
    for (const json& w : doc["w"]) {
      params.phase_weight.push_back(
          FlattenTable(w, params.block_size, params.table_cols(), "params: w"));
    }
  }
  if (!doc.contains("lambda") || !doc["lambda"].is_array()) {
    throw DataError("params: missing lambda array");
  }
  for (const json& l : doc["lambda"]) {
    if (!l.is_number()) throw DataError("params: non-numeric lambda");
    params.lambda.push_back(l.get<double>());
  }
  try {
    params.Validate();
  } catch (const InputError& e) {
    throw DataError(std::string("params: ") + e.what());
  }
  return params;
}

}  // namespace

WatsonParams ParamsFromJson(const json& doc) {
  try {
    return ParseParams(doc);
  } catch (const json::exception& e) {
    throw DataError(std::string("params: ") + e.what());
  }
}

void SaveParams(const std::filesystem::path& path, const WatsonParams& params) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write params file " + path.string());
  out << ParamsToJson(params).dump(2) << "\n";
}

WatsonParams LoadParams(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open params file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError("params file " + path.string() + " is not valid JSON: " +
                    e.what());
  }
  return ParamsFromJson(doc);
}

}  // namespace watson
