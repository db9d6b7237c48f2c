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

#ifndef WATSON_TWOAFC_H_
#define WATSON_TWOAFC_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "watson/image.h"
#include "watson/metric.h"

namespace watson {

// A reference, two distortions and the fraction p of judges who found the
// second distortion (x2) closer to the reference.
struct TwoAfcRecord {
  std::string id;
  Image reference;
  Image first;   // x1, "p0" in manifests
  Image second;  // x2, "p1" in manifests
  double p = 0.5;
  std::string family0;  // empty when untagged
  std::string family1;
};

void ValidateRecord(const TwoAfcRecord& record);

// ---------------------------------------------------------------------------
// Ranking head and scoring.

struct RankingHead {
  double gamma = 1.0;
  void Validate() const;
};

// sigmoid(gamma (d1 - d0) / (|d1| + |d0|)), 0.5 when both are zero. This is
// the probability that x1 is the closer distortion.
double PredictPreference(double d0, double d1, const RankingHead& head);

inline constexpr double kBceClamp = 1e-7;

// -[p log(q) + (1 - p) log(1 - q)] with q clamped to [1e-7, 1 - 1e-7].
double BceLoss(double q, double p);

// Hard decision for x2: 0 if d0 < d1, 1 if d0 > d1, 0.5 on a tie.
double BinaryChoice(double d0, double d1);

// p q + (1 - p)(1 - q).
double RecordScore(double p, double q);

// Mean RecordScore over records; throws InputError when empty.
double AgreementScore(std::span<const double> p, std::span<const double> d0,
                      std::span<const double> d1);
double HumanCeiling(std::span<const double> p);

using DistanceFn = std::function<double(const Image&, const Image&)>;
double AgreementScore(std::span<const TwoAfcRecord> records,
                      const DistanceFn& distance);

// ---------------------------------------------------------------------------
// Datasets.

struct LoadOptions {
  bool skip_invalid = false;  // warn and drop bad records instead of failing
};

// `path` is a CSV manifest (ref,p0,p1,judge[,family0,family1], paths
// relative to the manifest) or a split directory in the BAPPS layout
// (ref/, p0/, p1/ PNGs and judge/<id>.csv; optional family/<id>.csv).
// Warnings for skipped records are appended to `warnings`.
std::vector<TwoAfcRecord> LoadDataset(const std::filesystem::path& path,
                                      const LoadOptions& options = {},
                                      std::vector<std::string>* warnings =
                                          nullptr);

enum class Distortion { kNoise, kBlur, kQuantize, kTranslate, kContrast };
inline constexpr int kDistortionCount = 5;
std::string DistortionName(Distortion d);

// strength in [0, 1]; 0 returns the input unchanged. `rng` drives the noise
// samples and the translation direction.
Image ApplyDistortion(const Image& img, Distortion d, double strength,
                      std::mt19937_64& rng);

// Judged closeness of x2 under the synthetic labelling rule.
double OracleJudgement(Distortion d1, double s1, Distortion d2, double s2);

struct SyntheticConfig {
  int records = 100;
  int patch_size = 32;
  uint64_t seed = 0;
  std::string split = "train";
  // Optional PNGs to crop patches from; procedural textures otherwise.
  std::vector<std::filesystem::path> base_images;
};

// Writes <out>/<split>/{ref,p0,p1,judge,family}/<id>.* and the CSV manifest
// <out>/<split>.csv pointing at the same files. Returns the manifest path.
std::filesystem::path GenerateSyntheticDataset(
    const std::filesystem::path& out_dir, const SyntheticConfig& config);

// ---------------------------------------------------------------------------
// Training and evaluation.

enum class Optimizer { kAdam, kSgd };

struct TrainerConfig {
  double learning_rate = 1e-3;
  int epochs = 20;
  int batch_size = 64;
  uint64_t seed = 0;
  Optimizer optimizer = Optimizer::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  bool grid_randomization = true;
  bool freeze_metric = false;  // train gamma only
  int threads = 1;
  void Validate() const;
};

struct TrainResult {
  Metric metric;  // for Watson metrics, metric.watson.gamma == head.gamma
  RankingHead head;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> loss_curve;  // mean BCE after each epoch, offset (0,0)
};

// Distance pair used for training: d0 = L(ref, x1), d1 = L(ref, x2). The
// training target for p is 1 - PredictPreference(d0, d1).
TrainResult TrainMetric(const Metric& initial, const RankingHead& head,
                        std::span<const TwoAfcRecord> records,
                        const TrainerConfig& config);

// gamma-only fit on precomputed distances.
TrainResult TrainHead(std::span<const double> d0, std::span<const double> d1,
                      std::span<const double> p, const RankingHead& head,
                      const TrainerConfig& config);

// Mean BCE of the training objective at offset (0, 0).
double MeanTrainingLoss(const Metric& metric, const RankingHead& head,
                        std::span<const TwoAfcRecord> records, int threads = 1);

struct GroupScore {
  std::string group;
  size_t records = 0;
  double agreement = 0.0;
  double human_ceiling = 0.0;
};

struct EvalReport {
  size_t records = 0;
  double agreement = 0.0;
  double human_ceiling = 0.0;
  std::vector<GroupScore> groups;  // sorted by name
};

// Groups are "<family>" for same-family records, "<a>+<b>" (sorted) for
// mixed ones and "untagged" otherwise. Offset (0, 0).
EvalReport EvaluateMetric(const Metric& metric,
                          std::span<const TwoAfcRecord> records,
                          int threads = 1);

// Runs fn(i) for i in [0, n) on `threads` workers with static chunking.
void ParallelFor(size_t n, int threads, const std::function<void(size_t)>& fn);

}  // namespace watson

#endif  // WATSON_TWOAFC_H_
