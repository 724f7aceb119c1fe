// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace masc {

// Binary foreground mask at image resolution, row-major.
class PixelMask {
 public:
  PixelMask(int height, int width, std::vector<std::uint8_t> bits);
  static PixelMask filled(int height, int width, bool value);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  bool at(int y, int x) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

 private:
  int height_;
  int width_;
  std::vector<std::uint8_t> bits_;
};

// Binary mask over the patch grid; index = y * grid_w + x.
class PatchMask {
 public:
  PatchMask(int grid_h, int grid_w, std::vector<std::uint8_t> bits);
  static PatchMask filled(int grid_h, int grid_w, bool value);

  int grid_h() const noexcept { return grid_h_; }
  int grid_w() const noexcept { return grid_w_; }
  std::size_t size() const noexcept { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
  std::size_t count() const;
  PatchMask inverted() const;

  friend bool operator==(const PatchMask&, const PatchMask&) = default;

 private:
  int grid_h_;
  int grid_w_;
  std::vector<std::uint8_t> bits_;
};

// Bilinear resize of the {0,1} field with half-pixel centers and edge clamping,
// then threshold: cell value >= 0.5 is foreground.
PatchMask downsample_mask(const PixelMask& mask, int grid_h, int grid_w);

double foreground_fraction(const PixelMask& mask);

std::vector<std::size_t> foreground_indices(const PatchMask& mask);

// 8-bit grayscale PNG; pixel > 127 is foreground. Palette, 16-bit, RGB and
// alpha inputs are reduced to 8-bit gray before thresholding.
PixelMask load_mask_png(const std::filesystem::path& path);
void save_mask_png(const std::filesystem::path& path, const PixelMask& mask);

}  // namespace masc
