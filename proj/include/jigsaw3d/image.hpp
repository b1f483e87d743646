#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "jigsaw3d/error.hpp"

namespace jigsaw3d {

/// Dense planar image, channel-major: value(c, y, x) lives at
/// data[(c * height + y) * width + x]. Values are nominally in [0, 1].
class ImageGrid {
public:
  ImageGrid() = default;

  ImageGrid(int channels, int height, int width, float fill = 0.0f)
      : channels_(channels), height_(height), width_(width) {
    if (channels < 1 || height < 0 || width < 0) {
      throw Error(errc::kDimensionMismatch, "image dimensions must satisfy C >= 1, H >= 0, W >= 0");
    }
    data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
  }

  int channels() const noexcept { return channels_; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t plane_size() const noexcept { return static_cast<std::size_t>(height_) * width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  float& at(int c, int y, int x) noexcept { return data_[index(c, y, x)]; }
  float at(int c, int y, int x) const noexcept { return data_[index(c, y, x)]; }

  std::span<float> plane(int c) noexcept { return {data_.data() + c * plane_size(), plane_size()}; }
  std::span<const float> plane(int c) const noexcept {
    return {data_.data() + c * plane_size(), plane_size()};
  }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }

  bool same_shape(const ImageGrid& other) const noexcept {
    return channels_ == other.channels_ && height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;

private:
  std::size_t index(int c, int y, int x) const noexcept {
    return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
  }

  int channels_ = 1;
  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

/// True when every value is finite and inside [0, 1].
inline bool in_unit_range(const ImageGrid& img) {
  return std::all_of(img.data().begin(), img.data().end(),
                     [](float v) { return std::isfinite(v) && v >= 0.0f && v <= 1.0f; });
}

/// Bilinear sample at continuous pixel coordinates (x, y), where integer
/// coordinates are pixel centers. Clamp-to-edge addressing.
inline float sample_bilinear(const ImageGrid& img, int c, double x, double y) {
  const int w = img.width();
  const int h = img.height();
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1.0 - fx) * img.at(c, y0, x0) + fx * img.at(c, y0, x1);
  const double bottom = (1.0 - fx) * img.at(c, y1, x0) + fx * img.at(c, y1, x1);
  return static_cast<float>((1.0 - fy) * top + fy * bottom);
}

/// Bilinear texture lookup at UV (OBJ convention: v = 0 is the bottom row).
inline float sample_uv(const ImageGrid& tex, int c, double u, double v) {
  return sample_bilinear(tex, c, u * tex.width() - 0.5, (1.0 - v) * tex.height() - 0.5);
}

/// Largest centered crop whose sides are multiples of `multiple`. The
/// preprocessing step offered for images the jigsaw transform rejects.
inline ImageGrid center_crop_to_multiple(const ImageGrid& img, int multiple) {
  if (multiple < 1) throw Error(errc::kInvalidConfig, "crop multiple must be >= 1");
  const int h = img.height() / multiple * multiple;
  const int w = img.width() / multiple * multiple;
  const int oy = (img.height() - h) / 2;
  const int ox = (img.width() - w) / 2;
  ImageGrid out(img.channels(), h, w);
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(c, y, x) = img.at(c, y + oy, x + ox);
  return out;
}

/// Converts 1/2/4-channel images to 3-channel RGB (gray replicated, alpha
/// dropped). 3-channel input is returned as is.
inline ImageGrid to_rgb(const ImageGrid& img) {
  if (img.channels() == 3) return img;
  ImageGrid out(3, img.height(), img.width());
  const int src_color = img.channels() >= 3 ? 3 : 1;
  for (int c = 0; c < 3; ++c) {
    const auto src = img.plane(src_color == 3 ? c : 0);
    std::copy(src.begin(), src.end(), out.plane(c).begin());
  }
  return out;
}

/// Snaps every value to the nearest k/65535, the grid a 16-bit PNG stores
/// losslessly.
inline void quantize16(ImageGrid& img) {
  for (float& v : img.data()) {
    const double q = std::round(std::clamp(static_cast<double>(v), 0.0, 1.0) * 65535.0);
    v = static_cast<float>(q / 65535.0);
  }
}

}  // namespace jigsaw3d
