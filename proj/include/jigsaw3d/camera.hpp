#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "jigsaw3d/error.hpp"
#include "jigsaw3d/rng.hpp"
#include "jigsaw3d/vec.hpp"

namespace jigsaw3d {

inline constexpr int kDefaultImageSize = 512;
inline constexpr int kOrthogonalViewCount = 6;
inline constexpr int kRandomReferenceViews = 4;
inline constexpr double kDefaultHalfExtent = 0.55;
inline constexpr double kDefaultElevationDeg = 45.0;

/// Screen-space projection of a world point: continuous pixel coordinates
/// (pixel centers at k + 0.5, row 0 at the top) and depth along view_dir.
struct Projection {
  double x = 0.0;
  double y = 0.0;
  double depth = 0.0;
};

/// Orthographic camera looking along `view_dir` at the origin from
/// `distance` world units away. `up` is orthogonalised against view_dir on
/// construction.
class Camera {
public:
  Camera() = default;

  Camera(Vec3 view_dir, Vec3 up, double half_extent, int image_size, double near_plane = 1.0,
         double far_plane = 3.0, double distance = 2.0)
      : view_dir_(normalized(view_dir)),
        half_extent_(half_extent),
        image_size_(image_size),
        near_(near_plane),
        far_(far_plane),
        distance_(distance) {
    if (length(view_dir) == 0.0) throw Error(errc::kInvalidCamera, "view_dir must be non-zero");
    if (!(half_extent > 0.0)) throw Error(errc::kInvalidCamera, "half_extent must be positive");
    if (image_size < 1) throw Error(errc::kInvalidCamera, "image_size must be >= 1");
    if (!(near_plane < far_plane)) throw Error(errc::kInvalidCamera, "near must be < far");
    up_ = normalized(up - dot(up, view_dir_) * view_dir_);
    if (length(up_) == 0.0) throw Error(errc::kInvalidCamera, "up must not be parallel to view_dir");
    right_ = normalized(cross(view_dir_, up_));
  }

  /// Rebuilds a camera from stored fields without re-normalising, so a
  /// serialised camera round-trips bit for bit.
  static Camera restore(Vec3 view_dir, Vec3 up, Vec3 right, double half_extent, int image_size, double near_plane,
                        double far_plane, double distance) {
    Camera cam(view_dir, up, half_extent, image_size, near_plane, far_plane, distance);
    cam.view_dir_ = view_dir;
    cam.up_ = up;
    cam.right_ = right;
    return cam;
  }

  Vec3 view_dir() const noexcept { return view_dir_; }
  Vec3 up() const noexcept { return up_; }
  Vec3 right() const noexcept { return right_; }
  double half_extent() const noexcept { return half_extent_; }
  int image_size() const noexcept { return image_size_; }
  double near_plane() const noexcept { return near_; }
  double far_plane() const noexcept { return far_; }
  double distance() const noexcept { return distance_; }
  Vec3 eye() const noexcept { return -distance_ * view_dir_; }

  /// World size of one pixel edge.
  double pixel_size() const noexcept { return 2.0 * half_extent_ / image_size_; }

  Projection project(Vec3 p) const noexcept {
    const double scale = image_size_ / (2.0 * half_extent_);
    return {(dot(p, right_) + half_extent_) * scale, (half_extent_ - dot(p, up_)) * scale,
            dot(p, view_dir_) + distance_};
  }

  friend bool operator==(const Camera&, const Camera&) = default;

private:
  Vec3 view_dir_{0.0, 0.0, -1.0};
  Vec3 up_{0.0, 1.0, 0.0};
  Vec3 right_{1.0, 0.0, 0.0};
  double half_extent_ = kDefaultHalfExtent;
  int image_size_ = kDefaultImageSize;
  double near_ = 1.0;
  double far_ = 3.0;
  double distance_ = 2.0;
};

/// Cameras placed on +X, -X, +Y, -Y, +Z, -Z, each looking at the origin.
/// The +-Y views use +Z as up, the others +Y.
inline std::vector<Camera> orthogonal_cameras(int image_size = kDefaultImageSize,
                                              double half_extent = kDefaultHalfExtent) {
  const Vec3 y_up{0.0, 1.0, 0.0}, z_up{0.0, 0.0, 1.0};
  return {
      Camera({-1.0, 0.0, 0.0}, y_up, half_extent, image_size), Camera({1.0, 0.0, 0.0}, y_up, half_extent, image_size),
      Camera({0.0, -1.0, 0.0}, z_up, half_extent, image_size), Camera({0.0, 1.0, 0.0}, z_up, half_extent, image_size),
      Camera({0.0, 0.0, -1.0}, y_up, half_extent, image_size), Camera({0.0, 0.0, 1.0}, y_up, half_extent, image_size),
  };
}

inline const char* orthogonal_view_name(int k) {
  static constexpr const char* kNames[] = {"+x", "-x", "+y", "-y", "+z", "-z"};
  return kNames[k];
}

struct ElevationRange {
  double min_deg = -kDefaultElevationDeg;
  double max_deg = kDefaultElevationDeg;
};

/// Camera directions uniform by area on the sphere band between the two
/// elevations (azimuth uniform, sin(elevation) uniform).
inline std::vector<Camera> random_view_cameras(int n, std::uint64_t seed, ElevationRange elevation = {},
                                               double half_extent = kDefaultHalfExtent,
                                               int image_size = kDefaultImageSize) {
  if (n < 1) throw Error(errc::kInvalidCamera, "need at least one random view");
  if (elevation.min_deg > elevation.max_deg || elevation.min_deg < -90.0 || elevation.max_deg > 90.0)
    throw Error(errc::kInvalidCamera, "elevation range must be ordered within [-90, 90]");
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double s_lo = std::sin(elevation.min_deg * kDeg), s_hi = std::sin(elevation.max_deg * kDeg);
  Xoshiro256 rng(seed);
  std::vector<Camera> cams;
  cams.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double azimuth = 2.0 * std::numbers::pi * rng.uniform();
    const double s = s_lo + (s_hi - s_lo) * rng.uniform();
    const double c = std::sqrt(std::max(0.0, 1.0 - s * s));
    const Vec3 position{c * std::sin(azimuth), s, c * std::cos(azimuth)};
    const Vec3 up = std::abs(s) > 0.999 ? Vec3{0.0, 0.0, 1.0} : Vec3{0.0, 1.0, 0.0};
    cams.emplace_back(-position, up, half_extent, image_size);
  }
  return cams;
}

}  // namespace jigsaw3d
