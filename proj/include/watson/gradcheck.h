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

#ifndef WATSON_GRADCHECK_H_
#define WATSON_GRADCHECK_H_

#include <cstdint>
#include <string>
#include <vector>

#include "watson/grad.h"
#include "watson/metric.h"

namespace watson {

std::string GradTargetName(GradTarget target);

// Watson DCT/DFT in grey and colour, SSIM, L2 and L1.
std::vector<Metric> DefaultGradCheckMetrics();

struct GradSuiteConfig {
  std::vector<Metric> metrics = DefaultGradCheckMetrics();
  std::vector<GradTarget> targets = {GradTarget::kParams,
                                     GradTarget::kFirstInput,
                                     GradTarget::kSecondInput};
  int seeds = 20;
  int size = 16;
  double step = 1e-5;
  double rtol = 1e-4;
};

// One row per (metric, target); the worst seed decides max_rel_err.
struct GradSuiteEntry {
  std::string loss;
  GradTarget target = GradTarget::kParams;
  int runs = 0;
  double max_rel_err = 0.0;
  uint64_t worst_seed = 0;
  size_t checked = 0;
  size_t excluded = 0;
  size_t below_resolution = 0;
  bool passed = true;
};

// Seed s draws x and x' uniformly from [0.1, 0.9] (keeping the colour clamp
// inactive) and a random grid offset. Parameter targets are skipped for
// metrics without trainable parameters.
std::vector<GradSuiteEntry> RunGradientSuite(const GradSuiteConfig& config);

}  // namespace watson

#endif  // WATSON_GRADCHECK_H_
