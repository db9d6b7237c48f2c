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

#include "watson/transforms.h"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>

#include "test_util.h"
#include "watson/errors.h"

namespace watson {
namespace {

using testing::NaiveDct2;
using testing::NaiveDft2;
using testing::RandomBlock;

TEST(PartitionTest, ZeroOffsetTilesRowMajor) {
  std::vector<double> plane(16 * 16);
  std::iota(plane.begin(), plane.end(), 0.0);
  BlockPartition part = PartitionBlocks(plane, 16, 16, {});
  ASSERT_EQ(part.block_count(), 4);
  // Block 1 is the top-right tile; its first row is pixels 8..15.
  auto b1 = part.block(1);
  for (int j = 0; j < 8; ++j) EXPECT_EQ(b1[j], 8.0 + j);
  auto b2 = part.block(2);
  EXPECT_EQ(b2[0], 8.0 * 16);
}

TEST(PartitionTest, OffsetOneWrapsTheLastRowToTheTop) {
  // A (1, 0) shift puts the former last row at the top of block 0.
  std::vector<double> plane(16 * 16);
  std::iota(plane.begin(), plane.end(), 0.0);
  BlockPartition part = PartitionBlocks(plane, 16, 16, {8, 1, 0});
  auto b0 = part.block(0);
  for (int j = 0; j < 8; ++j) EXPECT_EQ(b0[j], 15.0 * 16 + j);
  for (int j = 0; j < 8; ++j) EXPECT_EQ(b0[8 + j], 0.0 + j);
}

TEST(PartitionTest, NegativeOffsetsWrapTheOtherWay) {
  std::vector<double> plane(16 * 16);
  std::iota(plane.begin(), plane.end(), 0.0);
  BlockPartition part = PartitionBlocks(plane, 16, 16, {8, -2, -3});
  // Shifted pixel (0, 0) is source (2, 3).
  EXPECT_EQ(part.block(0)[0], 2.0 * 16 + 3);
}

TEST(PartitionTest, NonMultipleSizesAreEdgeReplicated) {
  std::vector<double> plane(10 * 12);
  std::iota(plane.begin(), plane.end(), 0.0);
  BlockPartition part = PartitionBlocks(plane, 10, 12, {});
  EXPECT_EQ(part.block_rows, 2);
  EXPECT_EQ(part.block_cols, 2);
  // Bottom-right block: rows 8..15 map to 8, 9, 9, ...; cols 8..15 to 8..11.
  auto b3 = part.block(3);
  EXPECT_EQ(b3[0], 8.0 * 12 + 8);
  EXPECT_EQ(b3[2 * 8 + 0], 9.0 * 12 + 8);
  EXPECT_EQ(b3[7 * 8 + 7], 9.0 * 12 + 11);
}

TEST(PartitionTest, ScatterAddIsTheAdjointOfTheGather) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int h = 13, w = 19;
  std::vector<double> plane(h * w);
  for (double& v : plane) v = u(rng);
  const BlockGrid grid{8, 3, -4};
  BlockPartition part = PartitionBlocks(plane, h, w, grid);
  std::vector<double> g(part.values.size());
  for (double& v : g) v = u(rng);
  std::vector<double> back(h * w, 0.0);
  ScatterAddBlocks(g, part.source, back);
  double lhs = 0.0, rhs = 0.0;
  for (size_t i = 0; i < g.size(); ++i) lhs += part.values[i] * g[i];
  for (size_t i = 0; i < back.size(); ++i) rhs += plane[i] * back[i];
  EXPECT_NEAR(lhs, rhs, 1e-12);
}

TEST(PartitionTest, TooSmallPlaneIsRejected) {
  std::vector<double> plane(7 * 20);
  EXPECT_THROW(PartitionBlocks(plane, 7, 20, {}), InputError);
}

TEST(PartitionTest, GridOffsetsAreUniform) {
  // 81 cells, 81,000 draws. Chi-square with 80 dof: the 0.999 quantile is
  // about 124.8.
  std::mt19937_64 rng(2024);
  std::map<std::pair<int, int>, int> counts;
  const int draws = 81000;
  for (int i = 0; i < draws; ++i) ++counts[SampleGridOffset(rng)];
  ASSERT_EQ(counts.size(), 81u);
  double chi2 = 0.0;
  for (const auto& [cell, n] : counts) {
    EXPECT_GE(cell.first, -4);
    EXPECT_LE(cell.first, 4);
    EXPECT_GE(cell.second, -4);
    EXPECT_LE(cell.second, 4);
    chi2 += (n - 1000.0) * (n - 1000.0) / 1000.0;
  }
  EXPECT_LT(chi2, 124.8);
}

TEST(DctTest, MatchesNaiveOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    auto block = RandomBlock(8, rng);
    std::vector<double> fast(64);
    Dct2Block(block, fast);
    auto slow = NaiveDct2(block, 8);
    for (int i = 0; i < 64; ++i) EXPECT_NEAR(fast[i], slow[i], 1e-10);
  }
}

TEST(DctTest, ConstantBlockHasOnlyDc) {
  std::vector<double> block(64, 0.5), out(64);
  Dct2Block(block, out);
  EXPECT_NEAR(out[0], 8.0 * 0.5, 1e-13);
  for (int i = 1; i < 64; ++i) EXPECT_NEAR(out[i], 0.0, 1e-13);
}

TEST(DctTest, ParsevalAndInverse) {
  std::mt19937_64 rng(2);
  auto block = RandomBlock(8, rng);
  std::vector<double> c(64), back(64);
  Dct2Block(block, c);
  Dct2BlockAdjoint(c, back);
  double e_x = 0.0, e_c = 0.0;
  for (int i = 0; i < 64; ++i) {
    e_x += block[i] * block[i];
    e_c += c[i] * c[i];
    EXPECT_NEAR(back[i], block[i], 1e-12);
  }
  EXPECT_NEAR(e_x, e_c, 1e-12);
}

TEST(DftTest, ThirtyFourValidBinsForBlockEight) {
  const auto& kinds = HalfSpectrumKinds(8);
  ASSERT_EQ(kinds.size(), 40u);
  int self = 0, rep = 0, dup = 0;
  for (BinKind k : kinds) {
    if (k == BinKind::kSelfConjugate) ++self;
    if (k == BinKind::kRepresentative) ++rep;
    if (k == BinKind::kDuplicate) ++dup;
  }
  EXPECT_EQ(self, 4);
  EXPECT_EQ(rep, 30);
  EXPECT_EQ(dup, 6);
  // Every real 8x8 block has 64 real degrees of freedom: 4 + 2 * 30.
  EXPECT_EQ(self + 2 * rep, 64);
  const auto& mask = HalfSpectrumValidMask(8);
  EXPECT_EQ(std::accumulate(mask.begin(), mask.end(), 0), 34);
}

TEST(DftTest, MatchesNaiveOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto block = RandomBlock(8, rng);
    std::vector<double> re(40), im(40);
    Rdft2Block(block, re, im);
    auto full = NaiveDft2(block, 8);
    for (int u = 0; u < 8; ++u) {
      for (int v = 0; v <= 4; ++v) {
        EXPECT_NEAR(re[u * 5 + v], full[u * 8 + v].real(), 1e-10);
        EXPECT_NEAR(im[u * 5 + v], full[u * 8 + v].imag(), 1e-10);
      }
    }
  }
}

TEST(DftTest, SelfConjugateBinsAreExactlyReal) {
  std::mt19937_64 rng(4);
  auto block = RandomBlock(8, rng);
  std::vector<double> re(40), im(40);
  Rdft2Block(block, re, im);
  const auto& kinds = HalfSpectrumKinds(8);
  for (int n = 0; n < 40; ++n) {
    if (kinds[n] == BinKind::kSelfConjugate) EXPECT_EQ(im[n], 0.0);
  }
}

TEST(DftTest, CircularShiftOnlyChangesPhase) {
  std::mt19937_64 rng(5);
  auto block = RandomBlock(8, rng);
  std::vector<double> shifted(64);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) shifted[((y + 3) % 8) * 8 + (x + 5) % 8] = block[y * 8 + x];
  }
  FourierBlock a = Rdft2Polar(block), b = Rdft2Polar(shifted);
  for (int n = 0; n < 40; ++n) EXPECT_NEAR(a.amplitude[n], b.amplitude[n], 1e-10);
}

TEST(DftTest, ParsevalOverValidBins) {
  // sum x^2 = (1/B^2) sum_full |X|^2; representative bins count twice.
  std::mt19937_64 rng(6);
  auto block = RandomBlock(8, rng);
  FourierBlock f = Rdft2Polar(block);
  const auto& kinds = HalfSpectrumKinds(8);
  double e_x = 0.0, e_f = 0.0;
  for (double v : block) e_x += v * v;
  for (int n = 0; n < 40; ++n) {
    const double a2 = f.amplitude[n] * f.amplitude[n];
    if (kinds[n] == BinKind::kSelfConjugate) e_f += a2;
    if (kinds[n] == BinKind::kRepresentative) e_f += 2 * a2;
  }
  EXPECT_NEAR(e_x, e_f / 64.0, 1e-10);
}

TEST(DftTest, PhaseIsZeroAtZeroAmplitudeAndNeverMinusPi) {
  std::vector<double> zero(64, 0.0);
  FourierBlock f = Rdft2Polar(zero);
  for (int n = 0; n < 40; ++n) {
    EXPECT_EQ(f.amplitude[n], 0.0);
    EXPECT_EQ(f.phase[n], 0.0);
  }
  // Alternating rows give a negative real Nyquist bin: phase must be +pi.
  std::vector<double> alt(64);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) alt[y * 8 + x] = (y % 2 == 0) ? -1.0 : 1.0;
  }
  f = Rdft2Polar(alt);
  EXPECT_NEAR(f.amplitude[4 * 5], 64.0, 1e-10);
  EXPECT_EQ(f.phase[4 * 5], std::numbers::pi);
  for (double ph : f.phase) {
    EXPECT_GT(ph, -std::numbers::pi);
    EXPECT_LE(ph, std::numbers::pi);
  }
}

TEST(DftTest, AdjointMatchesForwardInnerProduct) {
  std::mt19937_64 rng(7);
  auto block = RandomBlock(8, rng);
  std::vector<double> re(40), im(40), gr(40), gi(40), back(64);
  Rdft2Block(block, re, im);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto& kinds = HalfSpectrumKinds(8);
  for (int n = 0; n < 40; ++n) {
    gr[n] = u(rng);
    gi[n] = kinds[n] == BinKind::kSelfConjugate ? 0.0 : u(rng);
  }
  Rdft2BlockAdjoint(gr, gi, back);
  double lhs = 0.0, rhs = 0.0;
  for (int n = 0; n < 40; ++n) lhs += re[n] * gr[n] + im[n] * gi[n];
  for (int i = 0; i < 64; ++i) rhs += block[i] * back[i];
  EXPECT_NEAR(lhs, rhs, 1e-10);
}

}  // namespace
}  // namespace watson
