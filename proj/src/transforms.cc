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

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "watson/errors.h"

namespace watson {
namespace {

int PositiveMod(int a, int m) {
  const int r = a % m;
  return r < 0 ? r + m : r;
}

struct Tables {
  std::vector<double> dct_basis;
  std::vector<double> cos_table;  // cos(2 pi m / B)
  std::vector<double> sin_table;
  std::vector<BinKind> kinds;
  std::vector<uint8_t> valid;
};

Tables BuildTables(int b) {
  Tables t;
  t.dct_basis.resize(static_cast<size_t>(b) * b);
  for (int k = 0; k < b; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / b);
    for (int n = 0; n < b; ++n) {
      t.dct_basis[k * b + n] =
          scale * std::cos(std::numbers::pi * (2 * n + 1) * k / (2.0 * b));
    }
  }
  t.cos_table.resize(b);
  t.sin_table.resize(b);
  for (int m = 0; m < b; ++m) {
    t.cos_table[m] = std::cos(2.0 * std::numbers::pi * m / b);
    t.sin_table[m] = std::sin(2.0 * std::numbers::pi * m / b);
  }
  const int hw = HalfSpectrumWidth(b);
  t.kinds.resize(static_cast<size_t>(b) * hw);
  t.valid.resize(t.kinds.size());
  for (int u = 0; u < b; ++u) {
    for (int v = 0; v < hw; ++v) {
      BinKind kind = BinKind::kRepresentative;
      const bool edge_col = v == 0 || 2 * v == b;
      if (edge_col) {
        const int partner = PositiveMod(-u, b);
        if (partner == u) {
          kind = BinKind::kSelfConjugate;
        } else if (partner < u) {
          kind = BinKind::kDuplicate;
        }
      }
      t.kinds[u * hw + v] = kind;
      t.valid[u * hw + v] = kind != BinKind::kDuplicate;
    }
  }
  return t;
}

const Tables& TablesFor(int block_size) {
  if (block_size <= 0 || block_size % 2 != 0) {
    throw InputError("block size must be positive and even, got " +
                     std::to_string(block_size));
  }
  static std::mutex mu;
  static std::map<int, Tables> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(block_size);
  if (it == cache.end()) {
    it = cache.emplace(block_size, BuildTables(block_size)).first;
  }
  return it->second;
}

}  // namespace

void BlockGrid::Validate() const {
  if (block_size <= 0) throw InputError("block size must be positive");
  if (std::abs(dy) > kMaxGridOffset || std::abs(dx) > kMaxGridOffset) {
    throw InputError("grid offset (" + std::to_string(dy) + ", " +
                     std::to_string(dx) + ") outside [-4, 4]");
  }
}

std::pair<int, int> SampleGridOffset(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dist(-kMaxGridOffset, kMaxGridOffset);
  const int dy = dist(rng);
  const int dx = dist(rng);
  return {dy, dx};
}

std::vector<int32_t> PartitionSourceIndex(int height, int width,
                                          const BlockGrid& grid) {
  grid.Validate();
  const int b = grid.block_size;
  if (height < b || width < b) {
    throw InputError("image " + std::to_string(height) + "x" +
                     std::to_string(width) + " is smaller than one " +
                     std::to_string(b) + "x" + std::to_string(b) + " block");
  }
  const int rows = (height + b - 1) / b;
  const int cols = (width + b - 1) / b;
  std::vector<int32_t> source(static_cast<size_t>(rows) * cols * b * b);
  size_t i = 0;
  for (int br = 0; br < rows; ++br) {
    for (int bc = 0; bc < cols; ++bc) {
      for (int y = 0; y < b; ++y) {
        // Edge replication of the shifted image, then undo the shift.
        const int py = std::min(br * b + y, height - 1);
        const int sy = PositiveMod(py - grid.dy, height);
        for (int x = 0; x < b; ++x) {
          const int px = std::min(bc * b + x, width - 1);
          const int sx = PositiveMod(px - grid.dx, width);
          source[i++] = sy * width + sx;
        }
      }
    }
  }
  return source;
}

BlockPartition PartitionBlocks(std::span<const double> plane, int height,
                               int width, const BlockGrid& grid) {
  if (plane.size() != static_cast<size_t>(height) * width) {
    throw InputError("plane size does not match its dimensions");
  }
  BlockPartition part;
  part.block_size = grid.block_size;
  part.source = PartitionSourceIndex(height, width, grid);
  part.block_rows = (height + grid.block_size - 1) / grid.block_size;
  part.block_cols = (width + grid.block_size - 1) / grid.block_size;
  part.values.resize(part.source.size());
  for (size_t i = 0; i < part.source.size(); ++i) {
    part.values[i] = plane[part.source[i]];
  }
  return part;
}

void ScatterAddBlocks(std::span<const double> block_values,
                      std::span<const int32_t> source,
                      std::span<double> plane) {
  for (size_t i = 0; i < source.size(); ++i) {
    plane[source[i]] += block_values[i];
  }
}

const std::vector<double>& DctBasis(int block_size) {
  return TablesFor(block_size).dct_basis;
}

void Dct2Block(std::span<const double> block, std::span<double> out,
               int block_size) {
  const int b = block_size;
  const std::vector<double>& d = DctBasis(b);
  std::vector<double> tmp(static_cast<size_t>(b) * b, 0.0);
  // tmp = X D^T (transform rows), out = D tmp.
  for (int y = 0; y < b; ++y) {
    for (int j = 0; j < b; ++j) {
      double acc = 0.0;
      for (int x = 0; x < b; ++x) acc += block[y * b + x] * d[j * b + x];
      tmp[y * b + j] = acc;
    }
  }
  for (int i = 0; i < b; ++i) {
    for (int j = 0; j < b; ++j) {
      double acc = 0.0;
      for (int y = 0; y < b; ++y) acc += d[i * b + y] * tmp[y * b + j];
      out[i * b + j] = acc;
    }
  }
}

void Dct2BlockAdjoint(std::span<const double> coeffs, std::span<double> out,
                      int block_size) {
  const int b = block_size;
  const std::vector<double>& d = DctBasis(b);
  std::vector<double> tmp(static_cast<size_t>(b) * b, 0.0);
  // tmp = G D, out = D^T tmp.
  for (int i = 0; i < b; ++i) {
    for (int x = 0; x < b; ++x) {
      double acc = 0.0;
      for (int j = 0; j < b; ++j) acc += coeffs[i * b + j] * d[j * b + x];
      tmp[i * b + x] = acc;
    }
  }
  for (int y = 0; y < b; ++y) {
    for (int x = 0; x < b; ++x) {
      double acc = 0.0;
      for (int i = 0; i < b; ++i) acc += d[i * b + y] * tmp[i * b + x];
      out[y * b + x] = acc;
    }
  }
}

const std::vector<BinKind>& HalfSpectrumKinds(int block_size) {
  return TablesFor(block_size).kinds;
}

const std::vector<uint8_t>& HalfSpectrumValidMask(int block_size) {
  return TablesFor(block_size).valid;
}

void Rdft2Block(std::span<const double> block, std::span<double> re,
                std::span<double> im, int block_size) {
  const int b = block_size;
  const int hw = HalfSpectrumWidth(b);
  const Tables& t = TablesFor(b);
  std::vector<double> row_re(static_cast<size_t>(b) * hw);
  std::vector<double> row_im(row_re.size());
  for (int y = 0; y < b; ++y) {
    for (int v = 0; v < hw; ++v) {
      double acc_re = 0.0, acc_im = 0.0;
      for (int x = 0; x < b; ++x) {
        const int m = (v * x) % b;
        acc_re += block[y * b + x] * t.cos_table[m];
        acc_im -= block[y * b + x] * t.sin_table[m];
      }
      row_re[y * hw + v] = acc_re;
      row_im[y * hw + v] = acc_im;
    }
  }
  for (int u = 0; u < b; ++u) {
    for (int v = 0; v < hw; ++v) {
      double acc_re = 0.0, acc_im = 0.0;
      for (int y = 0; y < b; ++y) {
        const int m = (u * y) % b;
        const double c = t.cos_table[m], s = t.sin_table[m];
        acc_re += row_re[y * hw + v] * c + row_im[y * hw + v] * s;
        acc_im += row_im[y * hw + v] * c - row_re[y * hw + v] * s;
      }
      re[u * hw + v] = acc_re;
      im[u * hw + v] =
          t.kinds[u * hw + v] == BinKind::kSelfConjugate ? 0.0 : acc_im;
    }
  }
}

void Rdft2BlockAdjoint(std::span<const double> grad_re,
                       std::span<const double> grad_im, std::span<double> out,
                       int block_size) {
  const int b = block_size;
  const int hw = HalfSpectrumWidth(b);
  const Tables& t = TablesFor(b);
  std::vector<double> h_re(static_cast<size_t>(b) * hw, 0.0);
  std::vector<double> h_im(h_re.size(), 0.0);
  for (int y = 0; y < b; ++y) {
    for (int v = 0; v < hw; ++v) {
      double acc_re = 0.0, acc_im = 0.0;
      for (int u = 0; u < b; ++u) {
        const int bin = u * hw + v;
        const double gr = grad_re[bin];
        const double gi =
            t.kinds[bin] == BinKind::kSelfConjugate ? 0.0 : grad_im[bin];
        const int m = (u * y) % b;
        const double c = t.cos_table[m], s = t.sin_table[m];
        acc_re += gr * c - gi * s;
        acc_im += gr * s + gi * c;
      }
      h_re[y * hw + v] = acc_re;
      h_im[y * hw + v] = acc_im;
    }
  }
  for (int y = 0; y < b; ++y) {
    for (int x = 0; x < b; ++x) {
      double acc = 0.0;
      for (int v = 0; v < hw; ++v) {
        const int m = (v * x) % b;
        acc += h_re[y * hw + v] * t.cos_table[m] -
               h_im[y * hw + v] * t.sin_table[m];
      }
      out[y * b + x] = acc;
    }
  }
}

FourierBlock Rdft2Polar(std::span<const double> block, int block_size) {
  const int n = HalfSpectrumBins(block_size);
  std::vector<double> re(n), im(n);
  Rdft2Block(block, re, im, block_size);
  FourierBlock out;
  out.amplitude.resize(n);
  out.phase.resize(n);
  for (int i = 0; i < n; ++i) {
    const double a = std::hypot(re[i], im[i]);
    out.amplitude[i] = a;
    double phi = a < kZeroAmplitude ? 0.0 : std::atan2(im[i], re[i]);
    if (phi == -std::numbers::pi) phi = std::numbers::pi;  // atan2(-0, x<0)
    out.phase[i] = phi;
  }
  return out;
}

}  // namespace watson
