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

#include "watson/metric.h"

#include <sstream>

#include "watson/loss.h"

namespace watson {

std::string MetricKindName(MetricKind kind) {
  switch (kind) {
    case MetricKind::kWatsonDct:
      return "watson-dct";
    case MetricKind::kWatsonDft:
      return "watson-dft";
    case MetricKind::kSsim:
      return "ssim";
    case MetricKind::kLp:
      return "lp";
  }
  return "unknown";
}

Metric Metric::Watson(WatsonParams params) {
  params.Validate();
  Metric m;
  m.kind = params.variant == WatsonVariant::kDct ? MetricKind::kWatsonDct
                                                 : MetricKind::kWatsonDft;
  m.watson = std::move(params);
  return m;
}

Metric Metric::Ssim(SsimParams params) {
  params.Validate();
  Metric m;
  m.kind = MetricKind::kSsim;
  m.ssim = params;
  return m;
}

Metric Metric::Lp(double p) {
  Metric m;
  m.kind = MetricKind::kLp;
  m.lp_exponent = p;
  return m;
}

std::string Metric::Name() const {
  if (kind == MetricKind::kLp) {
    std::ostringstream os;
    os << "l" << lp_exponent;
    return os.str();
  }
  if (is_watson()) {
    return MetricKindName(kind) +
           (watson.channels == WatsonChannels::kYCbCr ? "-color" : "-grey");
  }
  return MetricKindName(kind);
}

double Distance(const Metric& metric, const Image& x, const Image& x2,
                const BlockGrid& grid) {
  switch (metric.kind) {
    case MetricKind::kWatsonDct:
    case MetricKind::kWatsonDft:
      return WatsonDistance(x, x2, metric.watson, grid).value;
    case MetricKind::kSsim:
      return SsimDistance(x, x2, metric.ssim);
    case MetricKind::kLp:
      return LpDistance(x, x2, metric.lp_exponent);
  }
  return 0.0;
}

}  // namespace watson
