// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include "masc/mask_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "masc/errors.hpp"

namespace masc {
namespace {

struct Tap {
  int lo;
  int hi;
  double w_hi;
};

// Destination cell center mapped into source coordinates, clamped to the
// first/last source sample.
Tap source_tap(int dst, int dst_size, int src_size) {
  const double scale = static_cast<double>(src_size) / dst_size;
  double s = (dst + 0.5) * scale - 0.5;
  s = std::clamp(s, 0.0, static_cast<double>(src_size - 1));
  const int lo = static_cast<int>(std::floor(s));
  const int hi = std::min(lo + 1, src_size - 1);
  return {lo, hi, s - lo};
}

}  // namespace

PixelMask::PixelMask(int height, int width, std::vector<std::uint8_t> bits)
    : height_(height), width_(width), bits_(std::move(bits)) {
  if (height_ < 1 || width_ < 1) throw SchemaError("pixel mask must be at least 1x1");
  if (bits_.size() != static_cast<std::size_t>(height_) * width_)
    throw SchemaError("pixel mask bit count does not match its geometry");
  for (auto& b : bits_) {
    if (b > 1) throw DataError("pixel mask values must be 0 or 1");
  }
}

PixelMask PixelMask::filled(int height, int width, bool value) {
  return PixelMask(height, width,
                   std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(height, 0)) *
                                                 std::max(width, 0),
                                             value ? 1 : 0));
}

PatchMask::PatchMask(int grid_h, int grid_w, std::vector<std::uint8_t> bits)
    : grid_h_(grid_h), grid_w_(grid_w), bits_(std::move(bits)) {
  if (grid_h_ < 1 || grid_w_ < 1) throw SchemaError("patch mask must be at least 1x1");
  if (bits_.size() != static_cast<std::size_t>(grid_h_) * grid_w_)
    throw SchemaError("patch mask bit count does not match its geometry");
  for (auto& b : bits_) {
    if (b > 1) throw DataError("patch mask values must be 0 or 1");
  }
}

PatchMask PatchMask::filled(int grid_h, int grid_w, bool value) {
  return PatchMask(grid_h, grid_w,
                   std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(grid_h, 0)) *
                                                 std::max(grid_w, 0),
                                             value ? 1 : 0));
}

std::size_t PatchMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

PatchMask PatchMask::inverted() const {
  std::vector<std::uint8_t> flipped(bits_.size());
  std::transform(bits_.begin(), bits_.end(), flipped.begin(),
                 [](std::uint8_t b) { return static_cast<std::uint8_t>(1 - b); });
  return PatchMask(grid_h_, grid_w_, std::move(flipped));
}

PatchMask downsample_mask(const PixelMask& mask, int grid_h, int grid_w) {
  if (grid_h < 1 || grid_w < 1) throw DimensionError("patch grid must be at least 1x1");
  if (grid_h > mask.height() || grid_w > mask.width())
    throw DimensionError("patch grid " + std::to_string(grid_h) + "x" + std::to_string(grid_w) +
                         " larger than mask " + std::to_string(mask.height()) + "x" +
                         std::to_string(mask.width()));

  std::vector<Tap> xs(grid_w);
  for (int x = 0; x < grid_w; ++x) xs[x] = source_tap(x, grid_w, mask.width());

  std::vector<std::uint8_t> bits(static_cast<std::size_t>(grid_h) * grid_w);
  for (int y = 0; y < grid_h; ++y) {
    const Tap ty = source_tap(y, grid_h, mask.height());
    for (int x = 0; x < grid_w; ++x) {
      const Tap& tx = xs[x];
      const double top = (1.0 - tx.w_hi) * mask.at(ty.lo, tx.lo) + tx.w_hi * mask.at(ty.lo, tx.hi);
      const double bottom = (1.0 - tx.w_hi) * mask.at(ty.hi, tx.lo) + tx.w_hi * mask.at(ty.hi, tx.hi);
      const double v = (1.0 - ty.w_hi) * top + ty.w_hi * bottom;
      bits[static_cast<std::size_t>(y) * grid_w + x] = v >= 0.5 ? 1 : 0;
    }
  }
  return PatchMask(grid_h, grid_w, std::move(bits));
}

double foreground_fraction(const PixelMask& mask) {
  const auto& bits = mask.bits();
  const auto ones = std::count(bits.begin(), bits.end(), std::uint8_t{1});
  return static_cast<double>(ones) / static_cast<double>(bits.size());
}

std::vector<std::size_t> foreground_indices(const PatchMask& mask) {
  std::vector<std::size_t> out;
  out.reserve(mask.count());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(i);
  }
  return out;
}

}  // namespace masc
