// Copyright 2026 The masc Authors
// SPDX-License-Identifier: Apache-2.0

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "masc/errors.hpp"
#include "masc/mask_ops.hpp"

namespace masc {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void png_error_to_longjmp(png_structp png, png_const_charp msg) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text) *text = msg;
  png_longjmp(png, 1);
}

void png_warning_ignored(png_structp, png_const_charp) {}

}  // namespace

PixelMask load_mask_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw MissingAssetError({path.string()});

  unsigned char signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0)
    throw FormatError(path.string() + ": not a PNG file");

  std::string error;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_error_to_longjmp, png_warning_ignored);
  if (!png) throw FormatError("libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FormatError("libpng initialisation failed");
  }

  // Nothing with a non-trivial destructor may be created between setjmp and
  // the last libpng call below.
  int width = 0, height = 0;
  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": PNG decode failed: " + error);
  }

  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color_type == PNG_COLOR_TYPE_RGB || color_type == PNG_COLOR_TYPE_RGB_ALPHA ||
      color_type == PNG_COLOR_TYPE_PALETTE)
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  png_read_update_info(png, info);

  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  if (png_get_channels(png, info) != 1 || rowbytes != static_cast<std::size_t>(width))
    png_error(png, "unsupported channel layout after conversion");

  pixels.resize(rowbytes * height);
  rows.resize(height);
  for (int y = 0; y < height; ++y) rows[y] = pixels.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  std::vector<std::uint8_t> bits(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) bits[i] = pixels[i] > 127 ? 1 : 0;
  return PixelMask(height, width, std::move(bits));
}

void save_mask_png(const std::filesystem::path& path, const PixelMask& mask) {
  auto tmp = path;
  tmp += ".tmp";
  {
    FilePtr file(std::fopen(tmp.c_str(), "wb"));
    if (!file) throw DataError("cannot open " + tmp.string() + " for writing");

    std::string error;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_error_to_longjmp,
                                              png_warning_ignored);
    if (!png) throw DataError("libpng initialisation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
      png_destroy_write_struct(&png, nullptr);
      throw DataError("libpng initialisation failed");
    }

    std::vector<png_byte> pixels(mask.bits().size());
    for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = mask.bits()[i] ? 255 : 0;
    std::vector<png_bytep> rows(mask.height());
    for (int y = 0; y < mask.height(); ++y) rows[y] = pixels.data() + static_cast<std::size_t>(y) * mask.width();

    if (setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      throw DataError(path.string() + ": PNG encode failed: " + error);
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, mask.width(), mask.height(), 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace masc
