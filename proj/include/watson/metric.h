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

#ifndef WATSON_METRIC_H_
#define WATSON_METRIC_H_

#include <string>

#include "watson/baselines.h"
#include "watson/image.h"
#include "watson/params.h"
#include "watson/transforms.h"

namespace watson {

enum class MetricKind { kWatsonDct, kWatsonDft, kSsim, kLp };

std::string MetricKindName(MetricKind kind);

// One distance function behind a common "smaller is more similar" interface.
struct Metric {
  MetricKind kind = MetricKind::kWatsonDft;
  WatsonParams watson;  // Watson kinds only
  SsimParams ssim;
  double lp_exponent = 2.0;

  static Metric Watson(WatsonParams params);
  static Metric Ssim(SsimParams params = {});
  static Metric Lp(double p);

  bool is_watson() const {
    return kind == MetricKind::kWatsonDct || kind == MetricKind::kWatsonDft;
  }
  std::string Name() const;
};

// The grid offset only affects Watson metrics.
double Distance(const Metric& metric, const Image& x, const Image& x2,
                const BlockGrid& grid = {});

}  // namespace watson

#endif  // WATSON_METRIC_H_
