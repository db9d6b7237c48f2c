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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "test_util.h"
#include "watson/errors.h"
#include "watson/params.h"
#include "watson/png_io.h"
#include "watson/twoafc.h"

namespace watson {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("watson_twoafc_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double LogisticOracle(double z) { return 1.0 / (1.0 + std::exp(-z)); }

TEST(PredictPreferenceTest, Examples) {
  const RankingHead head{1.0};
  EXPECT_EQ(PredictPreference(0.0, 0.0, head), 0.5);
  EXPECT_EQ(PredictPreference(3.0, 3.0, head), 0.5);
  EXPECT_NEAR(PredictPreference(0.0, 2.0, head), 0.7311, 5e-5);
  EXPECT_NEAR(PredictPreference(0.0, 2.0, head), LogisticOracle(1.0), 1e-15);
  EXPECT_NEAR(PredictPreference(1.0, 3.0, RankingHead{4.0}),
              LogisticOracle(4.0 * 2.0 / 4.0), 1e-15);
}

TEST(PredictPreferenceTest, ScaleInvariantForPowersOfTwo) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const double d0 = u(rng), d1 = u(rng);
    const RankingHead head{0.5 + u(rng)};
    for (double c : {0.125, 2.0, 1024.0}) {
      EXPECT_EQ(PredictPreference(c * d0, c * d1, head),
                PredictPreference(d0, d1, head));
    }
  }
}

TEST(RankingHeadTest, GammaMustBePositive) {
  EXPECT_THROW(RankingHead{0.0}.Validate(), InputError);
  EXPECT_THROW(RankingHead{-1.0}.Validate(), InputError);
  EXPECT_NO_THROW(RankingHead{1e-3}.Validate());
}

TEST(BceLossTest, Examples) {
  for (double p : {0.0, 0.3, 1.0}) EXPECT_NEAR(BceLoss(0.5, p), std::log(2.0), 1e-15);
  EXPECT_NEAR(BceLoss(LogisticOracle(1.0), 1.0), 0.3133, 5e-5);
  EXPECT_NEAR(BceLoss(0.8, 0.8), 0.5004, 5e-5);
  EXPECT_NEAR(BceLoss(0.8, 0.8),
              -(0.8 * std::log(0.8) + 0.2 * std::log(0.2)), 1e-15);
}

TEST(BceLossTest, ClampKeepsLossFinite) {
  EXPECT_NEAR(BceLoss(0.0, 1.0), -std::log(kBceClamp), 1e-12);
  EXPECT_NEAR(BceLoss(1.0, 0.0), -std::log(kBceClamp), 1e-9);
  EXPECT_TRUE(std::isfinite(BceLoss(0.0, 0.5)));
}

TEST(AgreementTest, Examples) {
  EXPECT_EQ(BinaryChoice(1.0, 2.0), 0.0);
  EXPECT_EQ(BinaryChoice(2.0, 1.0), 1.0);
  EXPECT_EQ(BinaryChoice(1.5, 1.5), 0.5);
  EXPECT_NEAR(RecordScore(0.2, 0.0), 0.8, 1e-15);
  for (double p : {0.0, 0.37, 1.0}) EXPECT_EQ(RecordScore(p, 0.5), 0.5);
  const std::vector<double> p = {0.8};
  EXPECT_NEAR(HumanCeiling(p), 0.68, 1e-15);

  const std::vector<double> ps = {0.2, 0.9, 0.5};
  const std::vector<double> d0 = {1.0, 3.0, 2.0};
  const std::vector<double> d1 = {2.0, 1.0, 2.0};
  EXPECT_NEAR(AgreementScore(ps, d0, d1), (0.8 + 0.9 + 0.5) / 3.0, 1e-15);
}

TEST(AgreementTest, EmptyInputIsAnError) {
  const std::vector<double> none;
  EXPECT_THROW(AgreementScore(none, none, none), InputError);
  EXPECT_THROW(HumanCeiling(none), InputError);
  const std::vector<double> one = {0.5};
  EXPECT_THROW(AgreementScore(one, one, none), InputError);
}

TEST(AgreementTest, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p, d0, d1, t0, t1;
  for (int i = 0; i < 500; ++i) {
    p.push_back(u(rng));
    d0.push_back(u(rng));
    d1.push_back(u(rng));
    t0.push_back(std::exp(3.0 * d0.back()) + 7.0);
    t1.push_back(std::exp(3.0 * d1.back()) + 7.0);
  }
  EXPECT_EQ(AgreementScore(p, d0, d1), AgreementScore(p, t0, t1));
}

TEST(AgreementTest, CoinFlipMetricIsNearHalf) {
  const int n = 4000;
  std::mt19937_64 rng(17);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> p, d0, d1;
  for (int i = 0; i < n; ++i) {
    p.push_back(i % 2 ? 1.0 : 0.0);
    const bool pick = coin(rng);
    d0.push_back(pick ? 1.0 : 2.0);
    d1.push_back(pick ? 2.0 : 1.0);
  }
  const double sigma = std::sqrt(0.25 / n);
  EXPECT_NEAR(AgreementScore(p, d0, d1), 0.5, 3.0 * sigma);
}

TEST(AgreementTest, PerfectMetricOnUnanimousJudgesScoresOne) {
  std::vector<TwoAfcRecord> records;
  for (int i = 0; i < 6; ++i) {
    TwoAfcRecord r;
    r.reference = testing::RandomImage(8, 8, ColorSpace::kGrey, i);
    r.first = testing::Noisy(r.reference, i % 2 ? 0.3 : 0.01, 100 + i);
    r.second = testing::Noisy(r.reference, i % 2 ? 0.01 : 0.3, 200 + i);
    r.p = i % 2 ? 1.0 : 0.0;
    records.push_back(r);
  }
  const DistanceFn l2 = [](const Image& a, const Image& b) {
    return Distance(Metric::Lp(2.0), a, b);
  };
  EXPECT_EQ(AgreementScore(records, l2), 1.0);
  EXPECT_EQ(EvaluateMetric(Metric::Lp(2.0), records).agreement, 1.0);
}

TEST(OracleTest, Rules) {
  using D = Distortion;
  EXPECT_EQ(OracleJudgement(D::kNoise, 0.0, D::kBlur, 0.0), 0.5);
  EXPECT_EQ(OracleJudgement(D::kNoise, 0.4, D::kBlur, 0.0), 1.0);
  EXPECT_EQ(OracleJudgement(D::kNoise, 0.0, D::kBlur, 0.4), 0.0);
  // Noise sigma 0.02 vs 0.3 (strengths from sigma = 0.01 + 0.19 s).
  const double weak = (0.02 - 0.01) / 0.19, strong = (0.3 - 0.01) / 0.19;
  EXPECT_EQ(OracleJudgement(D::kNoise, strong, D::kNoise, weak), 0.9);
  EXPECT_DOUBLE_EQ(OracleJudgement(D::kNoise, weak, D::kNoise, strong), 0.1);
  EXPECT_EQ(OracleJudgement(D::kNoise, 0.5, D::kNoise, 0.5), 0.5);
  for (int a = 0; a < kDistortionCount; ++a) {
    for (int b = 0; b < kDistortionCount; ++b) {
      if (a == b) continue;
      const double p = OracleJudgement(D(a), 0.5, D(b), 0.5);
      EXPECT_GE(p, 0.2);
      EXPECT_LE(p, 0.8);
      EXPECT_NEAR(p + OracleJudgement(D(b), 0.5, D(a), 0.5), 1.0, 1e-15);
    }
  }
}

TEST(DistortionTest, ZeroStrengthIsIdentity) {
  const Image img = testing::RandomImage(16, 16, ColorSpace::kRgb, 3);
  std::mt19937_64 rng(1);
  for (int d = 0; d < kDistortionCount; ++d) {
    const Image out = ApplyDistortion(img, Distortion(d), 0.0, rng);
    EXPECT_EQ(out.pixels(), img.pixels()) << DistortionName(Distortion(d));
  }
}

TEST(DistortionTest, OutputStaysInRange) {
  const Image img = testing::RandomImage(16, 16, ColorSpace::kRgb, 4);
  std::mt19937_64 rng(2);
  for (int d = 0; d < kDistortionCount; ++d) {
    const Image out = ApplyDistortion(img, Distortion(d), 1.0, rng);
    ASSERT_TRUE(SameShape(out, img));
    for (double v : out.pixels()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(DatasetTest, EmptyManifestGivesNoRecords) {
  const fs::path dir = TempDir("empty");
  std::ofstream(dir / "m.csv") << "ref,p0,p1,judge\n";
  EXPECT_TRUE(LoadDataset(dir / "m.csv").empty());
  fs::remove_all(dir);
}

TEST(DatasetTest, ThreeRowCsvParsesExactly) {
  const fs::path dir = TempDir("three");
  const Image img = testing::RandomImage(8, 8, ColorSpace::kRgb, 9);
  WritePng(dir / "a.png", img, 8);
  WritePng(dir / "b.png", img, 8);
  {
    std::ofstream m(dir / "m.csv");
    m << "ref,p0,p1,judge\n"
      << "a.png,a.png,b.png,0.25\n"
      << "a.png,b.png,a.png,1\n"
      << "b.png,a.png,a.png,0.1\n";
  }
  const auto records = LoadDataset(dir / "m.csv");
  ASSERT_EQ(records.size(), 3u);
  EXPECT_EQ(records[0].p, 0.25);
  EXPECT_EQ(records[1].p, 1.0);
  EXPECT_EQ(records[2].p, 0.1);
  EXPECT_TRUE(records[0].family0.empty());
  fs::remove_all(dir);
}

TEST(DatasetTest, BadRecordsFailFastOrAreSkipped) {
  const fs::path dir = TempDir("bad");
  const Image img = testing::RandomImage(8, 8, ColorSpace::kRgb, 9);
  WritePng(dir / "a.png", img, 8);
  WritePng(dir / "small.png", testing::RandomImage(4, 8, ColorSpace::kRgb, 1), 8);
  {
    std::ofstream m(dir / "m.csv");
    m << "ref,p0,p1,judge\n"
      << "a.png,a.png,a.png,0.5\n"
      << "a.png,a.png,a.png,1.5\n"
      << "a.png,missing.png,a.png,0.5\n"
      << "a.png,small.png,a.png,0.5\n"
      << "a.png,a.png,a.png,abc\n";
  }
  EXPECT_THROW(LoadDataset(dir / "m.csv"), DataError);
  std::vector<std::string> warnings;
  const auto records = LoadDataset(dir / "m.csv", {.skip_invalid = true}, &warnings);
  EXPECT_EQ(records.size(), 1u);
  ASSERT_EQ(warnings.size(), 4u);
  EXPECT_NE(warnings[0].find("m.csv:3"), std::string::npos);
  EXPECT_THROW(LoadDataset(dir / "nothing.csv"), DataError);
  std::ofstream(dir / "h.csv") << "a,b,c\n";
  EXPECT_THROW(LoadDataset(dir / "h.csv"), DataError);
  fs::remove_all(dir);
}

TEST(DatasetTest, BappsLayoutMatchesCsvManifest) {
  const fs::path dir = TempDir("bapps");
  SyntheticConfig config;
  config.records = 12;
  config.patch_size = 16;
  config.seed = 21;
  config.split = "val";
  const fs::path manifest = GenerateSyntheticDataset(dir, config);
  EXPECT_EQ(manifest, dir / "val.csv");
  const auto csv = LoadDataset(manifest);
  const auto bapps = LoadDataset(dir / "val");
  ASSERT_EQ(csv.size(), 12u);
  ASSERT_EQ(bapps.size(), csv.size());
  for (size_t i = 0; i < csv.size(); ++i) {
    EXPECT_EQ(bapps[i].id, csv[i].id);
    EXPECT_EQ(bapps[i].p, csv[i].p);
    EXPECT_EQ(bapps[i].family0, csv[i].family0);
    EXPECT_EQ(bapps[i].family1, csv[i].family1);
    EXPECT_EQ(bapps[i].reference.pixels(), csv[i].reference.pixels());
    EXPECT_EQ(bapps[i].first.pixels(), csv[i].first.pixels());
    EXPECT_EQ(bapps[i].second.pixels(), csv[i].second.pixels());
    EXPECT_EQ(csv[i].reference.height(), 16);
    EXPECT_FALSE(csv[i].family0.empty());
  }
  fs::remove_all(dir);
}

TEST(DatasetTest, GenerationIsByteDeterministic) {
  const fs::path a = TempDir("det_a"), b = TempDir("det_b");
  SyntheticConfig config;
  config.records = 10;
  config.patch_size = 16;
  config.seed = 4;
  GenerateSyntheticDataset(a, config);
  GenerateSyntheticDataset(b, config);
  EXPECT_EQ(Slurp(a / "train.csv"), Slurp(b / "train.csv"));
  for (const auto& entry : fs::recursive_directory_iterator(a / "train")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), a);
    EXPECT_EQ(Slurp(entry.path()), Slurp(b / rel)) << rel;
  }
  config.seed = 5;
  GenerateSyntheticDataset(b, config);
  EXPECT_NE(Slurp(a / "train.csv"), Slurp(b / "train.csv"));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(TrainerTest, ZeroEpochsReturnsInitialParameters) {
  const fs::path dir = TempDir("zero");
  SyntheticConfig sc;
  sc.records = 8;
  sc.patch_size = 16;
  const auto records = LoadDataset(GenerateSyntheticDataset(dir, sc));
  const Metric metric = Metric::Watson(
      DefaultWatsonParams(WatsonVariant::kDft, WatsonChannels::kYCbCr));
  TrainerConfig config;
  config.epochs = 0;
  const TrainResult result = TrainMetric(metric, RankingHead{1.0}, records, config);
  EXPECT_TRUE(result.loss_curve.empty());
  EXPECT_EQ(ParamsToJson(result.metric.watson), ParamsToJson(metric.watson));
  EXPECT_EQ(result.head.gamma, 1.0);
  EXPECT_EQ(result.final_loss, result.initial_loss);
  fs::remove_all(dir);
}

TEST(TrainerTest, GammaOnlyLossDecreasesStrictlyOnSeparableSet) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> d0, d1, p;
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng), b = a + u(rng);
    const bool second_closer = i % 3 == 0;
    d0.push_back(second_closer ? b : a);
    d1.push_back(second_closer ? a : b);
    p.push_back(second_closer ? 1.0 : 0.0);
  }
  TrainerConfig config;
  config.epochs = 15;
  config.learning_rate = 0.05;
  const TrainResult result = TrainHead(d0, d1, p, RankingHead{1.0}, config);
  ASSERT_EQ(result.loss_curve.size(), 15u);
  double previous = result.initial_loss;
  for (double loss : result.loss_curve) {
    EXPECT_LT(loss, previous);
    previous = loss;
  }
  EXPECT_GT(result.head.gamma, 1.0);
}

TEST(TrainerTest, TrainingIsBitReproducibleAndReducesLoss) {
  const fs::path dir = TempDir("train");
  SyntheticConfig sc;
  sc.records = 40;
  sc.patch_size = 16;
  sc.seed = 2;
  const auto records = LoadDataset(GenerateSyntheticDataset(dir, sc));
  const Metric metric = Metric::Watson(
      DefaultWatsonParams(WatsonVariant::kDft, WatsonChannels::kYCbCr));
  TrainerConfig config;
  config.epochs = 3;
  config.batch_size = 8;
  config.learning_rate = 1e-2;
  config.seed = 6;
  const TrainResult a = TrainMetric(metric, RankingHead{1.0}, records, config);
  config.threads = 2;
  const TrainResult b = TrainMetric(metric, RankingHead{1.0}, records, config);
  EXPECT_EQ(ParamsToJson(a.metric.watson).dump(), ParamsToJson(b.metric.watson).dump());
  EXPECT_EQ(a.loss_curve, b.loss_curve);
  EXPECT_EQ(a.metric.watson.gamma, a.head.gamma);
  EXPECT_LT(a.final_loss, a.initial_loss);
  EXPECT_EQ(a.final_loss, MeanTrainingLoss(a.metric, a.head, records));
  fs::remove_all(dir);
}

TEST(TrainerTest, ConfigValidation) {
  TrainerConfig config;
  EXPECT_NO_THROW(config.Validate());
  config.learning_rate = 0.0;
  EXPECT_THROW(config.Validate(), InputError);
  config = {};
  config.batch_size = 0;
  EXPECT_THROW(config.Validate(), InputError);
  config = {};
  config.beta1 = 1.0;
  EXPECT_THROW(config.Validate(), InputError);
  const std::vector<TwoAfcRecord> none;
  EXPECT_THROW(EvaluateMetric(Metric::Lp(2.0), none), InputError);
}

TEST(EvaluateTest, GroupsByFamilyTags) {
  const fs::path dir = TempDir("groups");
  SyntheticConfig sc;
  sc.records = 30;
  sc.patch_size = 16;
  auto records = LoadDataset(GenerateSyntheticDataset(dir, sc));
  records[0].family0.clear();
  records[0].family1.clear();
  const EvalReport report = EvaluateMetric(Metric::Lp(2.0), records, 2);
  EXPECT_EQ(report.records, 30u);
  size_t total = 0;
  double weighted = 0.0;
  bool untagged = false;
  for (size_t i = 0; i < report.groups.size(); ++i) {
    const auto& g = report.groups[i];
    if (i > 0) EXPECT_LT(report.groups[i - 1].group, g.group);
    untagged |= g.group == "untagged";
    total += g.records;
    weighted += g.agreement * g.records;
  }
  EXPECT_TRUE(untagged);
  EXPECT_EQ(total, 30u);
  EXPECT_NEAR(weighted / 30.0, report.agreement, 1e-12);
  EXPECT_EQ(report.agreement, EvaluateMetric(Metric::Lp(2.0), records, 1).agreement);
  fs::remove_all(dir);
}

TEST(ParallelForTest, CoversRangeAndPropagatesErrors) {
  std::vector<int> hits(37, 0);
  ParallelFor(hits.size(), 4, [&](size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(ParallelFor(10, 3,
                           [](size_t i) {
                             if (i == 7) throw DataError("boom");
                           }),
               DataError);
}

}  // namespace
}  // namespace watson
