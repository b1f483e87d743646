#pragma once

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "jigsaw3d/error.hpp"
#include "jigsaw3d/image.hpp"

namespace jigsaw3d {

enum class BitDepth { k8 = 8, k16 = 16 };

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw Error(errc::kImageIo, "cannot open '" + path.string() + "'");
  return f;
}

// libpng reports through these instead of printing to stderr; the message
// ends up in the thrown Error.
inline thread_local std::string png_message;

[[noreturn]] inline void png_error_fn(png_structp png, png_const_charp msg) {
  png_message = msg ? msg : "unknown libpng error";
  png_longjmp(png, 1);
}

inline void png_warning_fn(png_structp, png_const_charp) {}

}  // namespace detail

/// Reads an 8- or 16-bit PNG. Palette and low-bit-depth gray are expanded,
/// tRNS becomes an alpha channel. Values map to [0, 1] by v / (2^bits - 1).
inline ImageGrid read_png(const std::filesystem::path& path) {
  auto file = detail::open_file(path, "rb");
  png_byte header[8];
  if (std::fread(header, 1, 8, file.get()) != 8 || png_sig_cmp(header, 0, 8) != 0) {
    throw Error(errc::kImageIo, "'" + path.string() + "' is not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, detail::png_error_fn, detail::png_warning_fn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(errc::kImageIo, "libpng initialisation failed");
  }
  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  int channels = 0, depth = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(errc::kImageIo, "corrupt PNG '" + path.string() + "': " + detail::png_message);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  png_set_expand(png);
  png_read_update_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  channels = png_get_channels(png, info);
  depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  pixels.resize(stride * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  ImageGrid img(channels, static_cast<int>(height), static_cast<int>(width));
  const double scale = depth == 16 ? 65535.0 : 255.0;
  for (int y = 0; y < static_cast<int>(height); ++y) {
    const png_byte* row = rows[y];
    for (int x = 0; x < static_cast<int>(width); ++x) {
      for (int c = 0; c < channels; ++c) {
        const std::size_t k = static_cast<std::size_t>(x) * channels + c;
        const unsigned v = depth == 16 ? (unsigned(row[2 * k]) << 8) | row[2 * k + 1] : row[k];
        img.at(c, y, x) = static_cast<float>(v / scale);
      }
    }
  }
  return img;
}

/// Writes 1-4 channel images as gray / gray+alpha / RGB / RGBA PNG. Values
/// are clamped to [0, 1] and rounded to the nearest code.
inline void write_png(const std::filesystem::path& path, const ImageGrid& img,
                      BitDepth bit_depth = BitDepth::k8) {
  if (img.channels() > 4) throw Error(errc::kImageIo, "PNG supports at most 4 channels");
  static constexpr int kColorType[] = {PNG_COLOR_TYPE_GRAY, PNG_COLOR_TYPE_GRAY_ALPHA,
                                       PNG_COLOR_TYPE_RGB, PNG_COLOR_TYPE_RGB_ALPHA};
  const int channels = img.channels();
  const int depth = static_cast<int>(bit_depth);
  const int bytes = depth / 8;
  const double scale = depth == 16 ? 65535.0 : 255.0;
  const std::size_t stride = static_cast<std::size_t>(img.width()) * channels * bytes;

  std::vector<png_byte> pixels(stride * img.height());
  std::vector<png_bytep> rows(img.height());
  for (int y = 0; y < img.height(); ++y) {
    png_byte* row = pixels.data() + y * stride;
    rows[y] = row;
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < channels; ++c) {
        const double v = std::isfinite(img.at(c, y, x)) ? img.at(c, y, x) : 0.0;
        const auto code = static_cast<unsigned>(std::lround(std::clamp(v, 0.0, 1.0) * scale));
        const std::size_t k = (static_cast<std::size_t>(x) * channels + c) * bytes;
        if (bytes == 2) {
          row[k] = static_cast<png_byte>(code >> 8);
          row[k + 1] = static_cast<png_byte>(code & 0xFF);
        } else {
          row[k] = static_cast<png_byte>(code);
        }
      }
    }
  }

  auto file = detail::open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, detail::png_error_fn, detail::png_warning_fn);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(errc::kImageIo, "libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(errc::kImageIo, "failed writing PNG '" + path.string() + "': " + detail::png_message);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, img.width(), img.height(), depth, kColorType[channels - 1],
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) throw Error(errc::kImageIo, "failed flushing '" + path.string() + "'");
}

}  // namespace jigsaw3d
