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

#include "watson/gradcheck.h"

#include <random>

#include "watson/errors.h"
#include "watson/transforms.h"

namespace watson {
namespace {

Image SeededImage(int size, ColorSpace space, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  Image img(size, size, space);
  for (double& v : img.pixels()) v = u(rng);
  return img;
}

}  // namespace

std::string GradTargetName(GradTarget target) {
  switch (target) {
    case GradTarget::kParams:
      return "params";
    case GradTarget::kFirstInput:
      return "first";
    case GradTarget::kSecondInput:
      return "second";
  }
  return "unknown";
}

std::vector<Metric> DefaultGradCheckMetrics() {
  std::vector<Metric> out;
  for (auto v : {WatsonVariant::kDct, WatsonVariant::kDft}) {
    for (auto c : {WatsonChannels::kGrey, WatsonChannels::kYCbCr}) {
      out.push_back(Metric::Watson(DefaultWatsonParams(v, c)));
    }
  }
  out.push_back(Metric::Ssim());
  out.push_back(Metric::Lp(2.0));
  out.push_back(Metric::Lp(1.0));
  return out;
}

std::vector<GradSuiteEntry> RunGradientSuite(const GradSuiteConfig& config) {
  if (config.seeds <= 0) throw InputError("gradient suite needs at least one seed");
  if (config.size < 8) throw InputError("gradient suite image size must be >= 8");
  std::vector<GradSuiteEntry> out;
  for (const Metric& m : config.metrics) {
    for (GradTarget t : config.targets) {
      if (t == GradTarget::kParams && !m.is_watson()) continue;
      GradSuiteEntry entry;
      entry.loss = m.Name();
      entry.target = t;
      for (int s = 0; s < config.seeds; ++s) {
        const auto seed = static_cast<uint64_t>(s);
        // Colour Watson needs RGB; the other metrics alternate.
        const bool colour = m.is_watson()
                                ? m.watson.channels == WatsonChannels::kYCbCr
                                : s % 2 == 1;
        const ColorSpace space = colour ? ColorSpace::kRgb : ColorSpace::kGrey;
        const Image x = SeededImage(config.size, space, seed);
        const Image x2 = SeededImage(config.size, space, seed + 1000);
        std::mt19937_64 rng(seed);
        const auto [dy, dx] = SampleGridOffset(rng);
        const FiniteDiffReport rep =
            FiniteDiffCheck({t, {kBlockSize, dy, dx}}, m, x, x2, config.step,
                            config.rtol);
        ++entry.runs;
        entry.checked += rep.checked;
        entry.excluded += rep.excluded;
        entry.below_resolution += rep.below_resolution;
        entry.passed = entry.passed && rep.passed;
        if (rep.max_rel_err > entry.max_rel_err || s == 0) {
          entry.max_rel_err = rep.max_rel_err;
          entry.worst_seed = seed;
        }
      }
      out.push_back(entry);
    }
  }
  return out;
}

}  // namespace watson
