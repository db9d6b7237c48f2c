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

#ifndef WATSON_TRANSFORMS_H_
#define WATSON_TRANSFORMS_H_

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace watson {

inline constexpr int kBlockSize = 8;
inline constexpr int kMaxGridOffset = 4;

// Origin of the block partition. Offsets are circular shifts applied to the
// whole image before tiling.
struct BlockGrid {
  int block_size = kBlockSize;
  int dy = 0;
  int dx = 0;

  void Validate() const;
};

// Draws (dy, dx) uniformly from {-4, ..., 4}^2.
std::pair<int, int> SampleGridOffset(std::mt19937_64& rng);

// A single image plane cut into K row-major B x B blocks. source[i] is the
// flat plane index each block sample was read from, so the partition is a
// gather and its adjoint a scatter-add.
struct BlockPartition {
  int block_size = kBlockSize;
  int block_rows = 0;
  int block_cols = 0;
  std::vector<double> values;   // K * B * B
  std::vector<int32_t> source;  // K * B * B

  int block_count() const { return block_rows * block_cols; }
  std::span<const double> block(int k) const {
    const size_t n = static_cast<size_t>(block_size) * block_size;
    return {values.data() + k * n, n};
  }
};

// Circularly shifts by (dy, dx), edge-replicates up to the next multiple of
// B, then tiles. Throws InputError when the plane is smaller than one block.
BlockPartition PartitionBlocks(std::span<const double> plane, int height,
                               int width, const BlockGrid& grid);

// Only computes the gather map; used by the gradient path.
std::vector<int32_t> PartitionSourceIndex(int height, int width,
                                          const BlockGrid& grid);

// Accumulates block-space values back onto the plane through `source`.
void ScatterAddBlocks(std::span<const double> block_values,
                      std::span<const int32_t> source, std::span<double> plane);

// ---------------------------------------------------------------------------
// Orthonormal 2-D DCT-II.

// Row-major B x B basis, basis[k * B + n] = c_k cos(pi (2n + 1) k / 2B).
const std::vector<double>& DctBasis(int block_size);

// out = D X D^T. `block` and `out` hold B * B row-major values.
void Dct2Block(std::span<const double> block, std::span<double> out,
               int block_size = kBlockSize);

// Adjoint (= inverse, orthonormal): out = D^T G D.
void Dct2BlockAdjoint(std::span<const double> coeffs, std::span<double> out,
                      int block_size = kBlockSize);

// ---------------------------------------------------------------------------
// Unnormalized 2-D DFT over the half spectrum, rows u in [0, B), columns
// v in [0, B/2]. Bin (u, v) is stored at u * (B/2 + 1) + v.

inline int HalfSpectrumWidth(int block_size) { return block_size / 2 + 1; }
inline int HalfSpectrumBins(int block_size) {
  return block_size * HalfSpectrumWidth(block_size);
}

enum class BinKind : uint8_t {
  kDuplicate,      // conjugate of another stored bin
  kSelfConjugate,  // real-valued bin (u, v in {0, B/2})
  kRepresentative  // one member of a conjugate pair
};

// Per-bin classification of the half-spectrum layout.
const std::vector<BinKind>& HalfSpectrumKinds(int block_size);
// true for kSelfConjugate and kRepresentative bins.
const std::vector<uint8_t>& HalfSpectrumValidMask(int block_size);

// Complex half spectrum. Self-conjugate bins get an exact zero imaginary part.
void Rdft2Block(std::span<const double> block, std::span<double> re,
                std::span<double> im, int block_size = kBlockSize);

// Given dL/dRe and dL/dIm over the half spectrum, returns dL/dX.
void Rdft2BlockAdjoint(std::span<const double> grad_re,
                       std::span<const double> grad_im, std::span<double> out,
                       int block_size = kBlockSize);

inline constexpr double kZeroAmplitude = 1e-12;

// Amplitude and principal phase in (-pi, pi]; phase is 0 where the
// amplitude is below kZeroAmplitude.
struct FourierBlock {
  std::vector<double> amplitude;
  std::vector<double> phase;
};
FourierBlock Rdft2Polar(std::span<const double> block,
                        int block_size = kBlockSize);

}  // namespace watson

#endif  // WATSON_TRANSFORMS_H_
