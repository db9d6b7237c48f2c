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

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "watson/errors.h"
#include "watson/png_io.h"
#include "watson/twoafc.h"

namespace watson {
namespace {

namespace fs = std::filesystem;

constexpr double kZeroStrengthRate = 0.05;
constexpr double kSameFamilyP = 0.9;
constexpr double kCrossFamilyStep = 0.075;

// Cross-family ordering, least to most objectionable. A pair's label moves
// 0.075 per rank towards the less objectionable family: 0.2 .. 0.8.
int FamilyRank(Distortion d) {
  switch (d) {
    case Distortion::kTranslate:
      return 0;
    case Distortion::kContrast:
      return 1;
    case Distortion::kBlur:
      return 2;
    case Distortion::kQuantize:
      return 3;
    case Distortion::kNoise:
      return 4;
  }
  return 0;
}

int QuantizationLevels(double s) {
  return static_cast<int>(std::lround(32.0 - 28.0 * s));
}
int TranslationPixels(double s) {
  return 1 + std::min(3, static_cast<int>(4.0 * s));
}

// The quantity that orders two strengths of the same family.
double EffectiveStrength(Distortion d, double s) {
  if (s == 0.0) return 0.0;
  if (d == Distortion::kQuantize) return -QuantizationLevels(s);
  if (d == Distortion::kTranslate) return TranslationPixels(s);
  return s;
}

Image GaussianBlur(const Image& img, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    total += k[i + radius];
  }
  for (double& v : k) v /= total;
  const int h = img.height(), w = img.width();
  Image tmp = img, out = img;
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          acc += k[i + radius] * img.at(c, y, std::clamp(x + i, 0, w - 1));
        }
        tmp.at(c, y, x) = acc;
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          acc += k[i + radius] * tmp.at(c, std::clamp(y + i, 0, h - 1), x);
        }
        out.at(c, y, x) = acc;
      }
    }
  }
  return out;
}

// Smooth colour ramp, a few gratings and a few hard-edged shapes.
Image ProceduralPatch(int size, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(size, size, ColorSpace::kRgb);
  std::array<double, 3> base, gy, gx;
  for (int c = 0; c < 3; ++c) {
    base[c] = 0.2 + 0.6 * u(rng);
    gy[c] = 0.3 * (u(rng) - 0.5);
    gx[c] = 0.3 * (u(rng) - 0.5);
  }
  struct Grating {
    double fy, fx, phase, amp;
    std::array<double, 3> tint;
  };
  std::vector<Grating> gratings(2 + rng() % 3);
  for (auto& g : gratings) {
    const double cycles = 1.0 + 5.0 * u(rng);
    const double angle = std::numbers::pi * u(rng);
    g.fy = 2.0 * std::numbers::pi * cycles * std::sin(angle) / size;
    g.fx = 2.0 * std::numbers::pi * cycles * std::cos(angle) / size;
    g.phase = 2.0 * std::numbers::pi * u(rng);
    g.amp = 0.05 + 0.15 * u(rng);
    for (double& t : g.tint) t = 0.5 + 0.5 * u(rng);
  }
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      for (int c = 0; c < 3; ++c) {
        double v = base[c] + gy[c] * (y - size / 2.0) / size +
                   gx[c] * (x - size / 2.0) / size;
        for (const auto& g : gratings) {
          v += g.amp * g.tint[c] * std::sin(g.fy * y + g.fx * x + g.phase);
        }
        img.at(c, y, x) = v;
      }
    }
  }
  const int shapes = 1 + static_cast<int>(rng() % 3);
  for (int s = 0; s < shapes; ++s) {
    const double cy = size * u(rng), cx = size * u(rng);
    const double r = size * (0.1 + 0.25 * u(rng));
    const bool disc = u(rng) < 0.5;
    std::array<double, 3> colour;
    for (double& v : colour) v = u(rng);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double dy = y + 0.5 - cy, dx = x + 0.5 - cx;
        const bool inside = disc ? dy * dy + dx * dx < r * r
                                 : std::abs(dy) < r && std::abs(dx) < 0.6 * r;
        if (!inside) continue;
        for (int c = 0; c < 3; ++c) img.at(c, y, x) = colour[c];
      }
    }
  }
  for (double& v : img.pixels()) v = std::clamp(v, 0.0, 1.0);
  return img;
}

Image Crop(const Image& src, int size, std::mt19937_64& rng) {
  if (src.height() < size || src.width() < size) {
    throw InputError("base image " + src.ShapeString() +
                     " is smaller than the patch size " + std::to_string(size));
  }
  const int y0 = static_cast<int>(rng() % (src.height() - size + 1));
  const int x0 = static_cast<int>(rng() % (src.width() - size + 1));
  Image out(size, size, src.space());
  for (int c = 0; c < src.channels(); ++c) {
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) out.at(c, y, x) = src.at(c, y0 + y, x0 + x);
    }
  }
  return out;
}

uint64_t Fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string FormatJudgement(double p) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), p);
  return std::string(buf, res.ptr);
}

std::string RecordId(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d", i);
  return buf;
}

}  // namespace

std::string DistortionName(Distortion d) {
  switch (d) {
    case Distortion::kNoise:
      return "noise";
    case Distortion::kBlur:
      return "blur";
    case Distortion::kQuantize:
      return "quantize";
    case Distortion::kTranslate:
      return "translate";
    case Distortion::kContrast:
      return "contrast";
  }
  return "unknown";
}

Image ApplyDistortion(const Image& img, Distortion d, double strength,
                      std::mt19937_64& rng) {
  if (!(strength >= 0.0 && strength <= 1.0)) {
    throw InputError("distortion strength must lie in [0, 1]");
  }
  if (strength == 0.0) return img;
  Image out = img;
  switch (d) {
    case Distortion::kNoise: {
      std::normal_distribution<double> n(0.0, 0.01 + 0.19 * strength);
      for (double& v : out.pixels()) v += n(rng);
      break;
    }
    case Distortion::kBlur:
      out = GaussianBlur(img, 0.4 + 2.1 * strength);
      break;
    case Distortion::kQuantize: {
      const double steps = QuantizationLevels(strength) - 1;
      for (double& v : out.pixels()) v = std::round(v * steps) / steps;
      break;
    }
    case Distortion::kTranslate: {
      const int k = TranslationPixels(strength);
      int sy = 0, sx = 0;
      while (sy == 0 && sx == 0) {
        sy = static_cast<int>(rng() % 3) - 1;
        sx = static_cast<int>(rng() % 3) - 1;
      }
      const int h = img.height(), w = img.width();
      for (int c = 0; c < img.channels(); ++c) {
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            out.at(c, ((y + sy * k) % h + h) % h, ((x + sx * k) % w + w) % w) =
                img.at(c, y, x);
          }
        }
      }
      break;
    }
    case Distortion::kContrast: {
      const double f = 1.0 - 0.6 * strength;
      for (int c = 0; c < img.channels(); ++c) {
        auto plane = out.plane(c);
        double mean = 0.0;
        for (double v : plane) mean += v;
        mean /= static_cast<double>(plane.size());
        for (double& v : plane) v = mean + f * (v - mean);
      }
      break;
    }
  }
  for (double& v : out.pixels()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

double OracleJudgement(Distortion d1, double s1, Distortion d2, double s2) {
  if (s1 == 0.0 && s2 == 0.0) return 0.5;
  if (s2 == 0.0) return 1.0;
  if (s1 == 0.0) return 0.0;
  if (d1 == d2) {
    const double e1 = EffectiveStrength(d1, s1), e2 = EffectiveStrength(d2, s2);
    if (e2 < e1) return kSameFamilyP;
    if (e2 > e1) return 1.0 - kSameFamilyP;
    return 0.5;
  }
  return 0.5 + kCrossFamilyStep * (FamilyRank(d1) - FamilyRank(d2));
}

fs::path GenerateSyntheticDataset(const fs::path& out_dir,
                                  const SyntheticConfig& config) {
  if (config.records < 0) throw InputError("record count must be >= 0");
  if (config.patch_size < 8) throw InputError("patch size must be >= 8");
  if (config.split.empty() || config.split.find('/') != std::string::npos) {
    throw InputError("split name must be a plain directory name");
  }
  std::vector<Image> bases;
  for (const auto& path : config.base_images) {
    Image img = ReadPng(path);
    if (img.height() < 8 || img.width() < 8) {
      throw InputError("base image " + path.string() + " is smaller than 8x8");
    }
    if (img.space() == ColorSpace::kGrey) {
      Image rgb(img.height(), img.width(), ColorSpace::kRgb);
      for (int c = 0; c < 3; ++c) {
        std::copy(img.pixels().begin(), img.pixels().end(), rgb.plane(c).begin());
      }
      img = std::move(rgb);
    }
    bases.push_back(std::move(img));
  }

  const fs::path split_dir = out_dir / config.split;
  for (const char* sub : {"ref", "p0", "p1", "judge", "family"}) {
    fs::create_directories(split_dir / sub);
  }
  const fs::path manifest = out_dir / (config.split + ".csv");
  std::ofstream csv(manifest, std::ios::binary);
  if (!csv) throw DataError("cannot write " + manifest.string());
  csv << "ref,p0,p1,judge,family0,family1\n";

  const uint64_t split_hash = Fnv1a(config.split);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < config.records; ++i) {
    std::seed_seq seq{static_cast<uint32_t>(config.seed),
                      static_cast<uint32_t>(config.seed >> 32),
                      static_cast<uint32_t>(split_hash),
                      static_cast<uint32_t>(i)};
    std::mt19937_64 rng(seq);
    Image ref = bases.empty()
                    ? ProceduralPatch(config.patch_size, rng)
                    : Crop(bases[rng() % bases.size()], config.patch_size, rng);
    const auto f0 = static_cast<Distortion>(rng() % kDistortionCount);
    const auto f1 = static_cast<Distortion>(rng() % kDistortionCount);
    const double s0 = u(rng) < kZeroStrengthRate ? 0.0 : u(rng);
    const double s1 = u(rng) < kZeroStrengthRate ? 0.0 : u(rng);
    const Image x1 = ApplyDistortion(ref, f0, s0, rng);
    const Image x2 = ApplyDistortion(ref, f1, s1, rng);
    const double p = OracleJudgement(f0, s0, f1, s1);

    const std::string id = RecordId(i);
    const std::string png = id + ".png";
    WritePng(split_dir / "ref" / png, ref, 8);
    WritePng(split_dir / "p0" / png, x1, 8);
    WritePng(split_dir / "p1" / png, x2, 8);
    std::ofstream(split_dir / "judge" / (id + ".csv"), std::ios::binary)
        << FormatJudgement(p) << "\n";
    std::ofstream(split_dir / "family" / (id + ".csv"), std::ios::binary)
        << DistortionName(f0) << "," << DistortionName(f1) << "\n";
    const std::string rel = config.split + "/";
    csv << rel << "ref/" << png << "," << rel << "p0/" << png << "," << rel
        << "p1/" << png << "," << FormatJudgement(p) << ","
        << DistortionName(f0) << "," << DistortionName(f1) << "\n";
  }
  if (!csv) throw DataError("failed writing " + manifest.string());
  return manifest;
}

}  // namespace watson
