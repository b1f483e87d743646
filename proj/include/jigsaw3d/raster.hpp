#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "jigsaw3d/camera.hpp"
#include "jigsaw3d/image.hpp"
#include "jigsaw3d/mesh.hpp"
#include "jigsaw3d/parallel.hpp"
#include "jigsaw3d/vec.hpp"

namespace jigsaw3d {

inline constexpr int kSubpixelBits = 8;
inline constexpr std::int64_t kSubpixelScale = std::int64_t{1} << kSubpixelBits;
inline constexpr int kRasterTile = 64;
inline constexpr float kBackgroundValue = 0.5f;

/// Vertex coordinate snapped to the 1/256 sub-pixel grid. Edge functions on
/// snapped coordinates are exact integers, which is what makes the top-left
/// rule watertight.
struct FixedPoint {
  std::int64_t x = 0;
  std::int64_t y = 0;
};

inline FixedPoint snap(double px, double py) noexcept {
  return {static_cast<std::int64_t>(std::llround(px * kSubpixelScale)),
          static_cast<std::int64_t>(std::llround(py * kSubpixelScale))};
}

/// Pixel center of (x, y) on the sub-pixel grid.
constexpr FixedPoint pixel_center(int x, int y) noexcept {
  return {x * kSubpixelScale + kSubpixelScale / 2, y * kSubpixelScale + kSubpixelScale / 2};
}

constexpr std::int64_t edge_fixed(FixedPoint a, FixedPoint b, FixedPoint p) noexcept {
  return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
}

/// With positive-area (clockwise on a y-down screen) winding, an edge a->b
/// is "top" when horizontal and pointing right, "left" when pointing up.
constexpr bool is_top_left(FixedPoint a, FixedPoint b) noexcept {
  const std::int64_t dx = b.x - a.x, dy = b.y - a.y;
  return (dy == 0 && dx > 0) || dy < 0;
}

struct GBuffer {
  int width = 0;
  int height = 0;
  std::vector<double> depth;
  std::vector<Vec3> position;
  std::vector<Vec3> normal;
  std::vector<Vec2> uv;
  std::vector<int> tri_id;
  std::vector<std::array<double, 3>> barycentric;

  GBuffer() = default;
  GBuffer(int w, int h)
      : width(w),
        height(h),
        depth(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity()),
        position(depth.size()),
        normal(depth.size()),
        uv(depth.size()),
        tri_id(depth.size(), -1),
        barycentric(depth.size(), {0.0, 0.0, 0.0}) {}

  std::size_t index(int x, int y) const noexcept { return static_cast<std::size_t>(y) * width + x; }
  bool covered(std::size_t i) const noexcept { return tri_id[i] >= 0; }
  std::size_t covered_count() const {
    return static_cast<std::size_t>(std::count_if(tri_id.begin(), tri_id.end(), [](int t) { return t >= 0; }));
  }
};

/// Screen-space setup of one triangle for one camera.
struct ScreenTriangle {
  std::array<FixedPoint, 3> v{};
  std::array<double, 3> depth{};
  std::array<int, 3> order{0, 1, 2};  // maps rasterised vertex slot -> mesh corner
  std::int64_t area = 0;
  int min_x = 0, max_x = -1, min_y = 0, max_y = -1;
};

/// Snaps three continuous pixel-space points and reorders them so the area
/// is positive. Returns area == 0 for degenerate (or absurdly off-screen)
/// triangles.
inline ScreenTriangle setup_screen_triangle(const std::array<Vec2, 3>& pts, const std::array<double, 3>& depth) {
  ScreenTriangle st;
  constexpr double kLimit = double(1 << 20);
  for (int k = 0; k < 3; ++k) {
    if (!(std::abs(pts[k].x) < kLimit && std::abs(pts[k].y) < kLimit)) return st;
    st.v[k] = snap(pts[k].x, pts[k].y);
    st.depth[k] = depth[k];
  }
  st.area = edge_fixed(st.v[0], st.v[1], st.v[2]);
  if (st.area == 0) return st;
  if (st.area < 0) {
    std::swap(st.v[1], st.v[2]);
    std::swap(st.depth[1], st.depth[2]);
    std::swap(st.order[1], st.order[2]);
    st.area = -st.area;
  }
  auto floor_div = [](std::int64_t a) {
    return static_cast<int>((a >= 0 ? a : a - kSubpixelScale + 1) / kSubpixelScale);
  };
  const std::int64_t lo_x = std::min({st.v[0].x, st.v[1].x, st.v[2].x}), hi_x = std::max({st.v[0].x, st.v[1].x, st.v[2].x});
  const std::int64_t lo_y = std::min({st.v[0].y, st.v[1].y, st.v[2].y}), hi_y = std::max({st.v[0].y, st.v[1].y, st.v[2].y});
  st.min_x = floor_div(lo_x - kSubpixelScale / 2);
  st.max_x = floor_div(hi_x - kSubpixelScale / 2) + 1;
  st.min_y = floor_div(lo_y - kSubpixelScale / 2);
  st.max_y = floor_div(hi_y - kSubpixelScale / 2) + 1;
  return st;
}

inline ScreenTriangle setup_triangle(const TriangleMesh& mesh, int tri, const Camera& cam) {
  std::array<Vec2, 3> pts{};
  std::array<double, 3> depth{};
  for (int k = 0; k < 3; ++k) {
    const Projection p = cam.project(mesh.positions[mesh.triangles[tri][k].position]);
    pts[k] = {p.x, p.y};
    depth[k] = p.depth;
  }
  return setup_screen_triangle(pts, depth);
}

/// Barycentric weights against the original (pre-reorder) vertex order.
inline std::array<double, 3> barycentric_weights(const ScreenTriangle& st, const std::array<std::int64_t, 3>& w) {
  const double inv = 1.0 / static_cast<double>(st.area);
  std::array<double, 3> bc{};
  for (int k = 0; k < 3; ++k) bc[st.order[k]] = w[k] * inv;
  return bc;
}

/// Coverage test for a pixel center under the top-left rule. On success
/// fills the edge weights (w[k] is opposite vertex slot k).
inline bool cover_test(const ScreenTriangle& st, FixedPoint p, std::array<std::int64_t, 3>& w) noexcept {
  w[0] = edge_fixed(st.v[1], st.v[2], p);
  w[1] = edge_fixed(st.v[2], st.v[0], p);
  w[2] = edge_fixed(st.v[0], st.v[1], p);
  const bool tl0 = is_top_left(st.v[1], st.v[2]);
  const bool tl1 = is_top_left(st.v[2], st.v[0]);
  const bool tl2 = is_top_left(st.v[0], st.v[1]);
  return (w[0] > 0 || (w[0] == 0 && tl0)) && (w[1] > 0 || (w[1] == 0 && tl1)) && (w[2] > 0 || (w[2] == 0 && tl2));
}

/// Edge-function rasterisation with a z-buffer over 64x64 screen tiles.
/// Tiles are disjoint and each walks triangles in mesh order, so the result
/// does not depend on the thread count. Nearest depth wins; ties keep the
/// earlier triangle. Fragments outside [near, far] are clipped.
inline GBuffer rasterize(const TriangleMesh& mesh, const Camera& cam) {
  const int size = cam.image_size();
  GBuffer gb(size, size);
  const int tri_count = static_cast<int>(mesh.triangles.size());
  std::vector<ScreenTriangle> screen(tri_count);
  for (int t = 0; t < tri_count; ++t) screen[t] = setup_triangle(mesh, t, cam);

  const int tiles_x = (size + kRasterTile - 1) / kRasterTile;
  const int tiles = tiles_x * tiles_x;
  parallel_for(static_cast<std::size_t>(tiles), [&](std::size_t tile) {
    const int tx0 = static_cast<int>(tile % tiles_x) * kRasterTile;
    const int ty0 = static_cast<int>(tile / tiles_x) * kRasterTile;
    const int tx1 = std::min(tx0 + kRasterTile, size) - 1;
    const int ty1 = std::min(ty0 + kRasterTile, size) - 1;
    std::array<std::int64_t, 3> w{};
    for (int t = 0; t < tri_count; ++t) {
      const ScreenTriangle& st = screen[t];
      if (st.area == 0) continue;
      const int x0 = std::max(st.min_x, tx0), x1 = std::min(st.max_x, tx1);
      const int y0 = std::max(st.min_y, ty0), y1 = std::min(st.max_y, ty1);
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          if (!cover_test(st, pixel_center(x, y), w)) continue;
          const double inv = 1.0 / static_cast<double>(st.area);
          const std::array<double, 3> b{w[0] * inv, w[1] * inv, w[2] * inv};
          const double z = b[0] * st.depth[0] + b[1] * st.depth[1] + b[2] * st.depth[2];
          const std::size_t i = gb.index(x, y);
          if (z < cam.near_plane() || z > cam.far_plane() || !(z < gb.depth[i])) continue;
          gb.depth[i] = z;
          gb.tri_id[i] = t;
          // Barycentrics reported against the mesh's own corner order.
          std::array<double, 3> bc{};
          for (int k = 0; k < 3; ++k) bc[st.order[k]] = b[k];
          gb.barycentric[i] = bc;
        }
      }
    }
    // Attribute resolve for this tile's winners.
    for (int y = ty0; y <= ty1; ++y)
      for (int x = tx0; x <= tx1; ++x) {
        const std::size_t i = gb.index(x, y);
        if (gb.tri_id[i] < 0) continue;
        const Triangle& tri = mesh.triangles[gb.tri_id[i]];
        const auto& b = gb.barycentric[i];
        Vec3 p{}, n{};
        Vec2 uv{};
        for (int k = 0; k < 3; ++k) {
          p = p + b[k] * mesh.positions[tri[k].position];
          n = n + b[k] * mesh.normals[tri[k].normal];
          if (tri[k].uv >= 0) uv = uv + b[k] * mesh.uvs[tri[k].uv];
        }
        gb.position[i] = p;
        gb.normal[i] = normalized(n);
        gb.uv[i] = uv;
      }
  });
  return gb;
}

/// Depth buffer of one view; +inf marks background.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> depth;

  double at(int x, int y) const noexcept { return depth[static_cast<std::size_t>(y) * width + x]; }
  friend bool operator==(const DepthMap&, const DepthMap&) = default;
};

inline DepthMap depth_map(const GBuffer& gb) { return {gb.width, gb.height, gb.depth}; }

/// Depth as a single-channel image: (d - near) / (far - near), background 1.
inline ImageGrid encode_depth(const DepthMap& dm, const Camera& cam) {
  ImageGrid img(1, dm.height, dm.width);
  const double range = cam.far_plane() - cam.near_plane();
  for (std::size_t i = 0; i < dm.depth.size(); ++i) {
    const double d = dm.depth[i];
    img.data()[i] = std::isfinite(d) ? static_cast<float>(std::clamp((d - cam.near_plane()) / range, 0.0, 1.0)) : 1.0f;
  }
  return img;
}

/// Inverse of encode_depth; a value of exactly 1 decodes to +inf.
inline DepthMap decode_depth(const ImageGrid& img, const Camera& cam) {
  DepthMap dm{img.width(), img.height(), std::vector<double>(img.plane_size())};
  const double range = cam.far_plane() - cam.near_plane();
  const auto plane = img.plane(0);
  for (std::size_t i = 0; i < plane.size(); ++i)
    dm.depth[i] = plane[i] >= 1.0f ? std::numeric_limits<double>::infinity() : cam.near_plane() + plane[i] * range;
  return dm;
}

struct GeometryMaps {
  std::vector<ImageGrid> position;
  std::vector<ImageGrid> normal;
};

/// Position encoded as clamp(p + 0.5), normal as (n + 1) / 2, background 0.5.
inline ImageGrid encode_position_map(const GBuffer& gb) {
  ImageGrid img(3, gb.height, gb.width, kBackgroundValue);
  for (int y = 0; y < gb.height; ++y)
    for (int x = 0; x < gb.width; ++x) {
      const std::size_t i = gb.index(x, y);
      if (!gb.covered(i)) continue;
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = static_cast<float>(std::clamp(gb.position[i][c] + 0.5, 0.0, 1.0));
    }
  return img;
}

inline ImageGrid encode_normal_map(const GBuffer& gb) {
  ImageGrid img(3, gb.height, gb.width, kBackgroundValue);
  for (int y = 0; y < gb.height; ++y)
    for (int x = 0; x < gb.width; ++x) {
      const std::size_t i = gb.index(x, y);
      if (!gb.covered(i)) continue;
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = static_cast<float>((gb.normal[i][c] + 1.0) * 0.5);
    }
  return img;
}

inline GeometryMaps geometry_condition_maps(const TriangleMesh& mesh, const std::vector<Camera>& cameras) {
  GeometryMaps maps;
  for (const Camera& cam : cameras) {
    const GBuffer gb = rasterize(mesh, cam);
    maps.position.push_back(encode_position_map(gb));
    maps.normal.push_back(encode_normal_map(gb));
  }
  return maps;
}

/// Textured color from an existing G-buffer: bilinear lookup at the
/// interpolated UV; background pixels are `background`.
inline ImageGrid shade_textured(const GBuffer& gb, const ImageGrid& texture, float background = kBackgroundValue) {
  ImageGrid img(3, gb.height, gb.width, background);
  for (int y = 0; y < gb.height; ++y)
    for (int x = 0; x < gb.width; ++x) {
      const std::size_t i = gb.index(x, y);
      if (!gb.covered(i)) continue;
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = sample_uv(texture, c, gb.uv[i].x, gb.uv[i].y);
    }
  return img;
}

/// Renders the mesh with its texture. `supersample` > 1 renders at
/// supersample^2 samples per pixel and box-filters (background included).
inline ImageGrid render_textured(const TriangleMesh& mesh, const ImageGrid& texture, const Camera& cam,
                                 int supersample = 1) {
  mesh.require_uvs();
  if (texture.channels() != 3) throw Error(errc::kChannelMismatch, "texture must have 3 channels");
  if (supersample <= 1) return shade_textured(rasterize(mesh, cam), texture);
  const Camera big = Camera::restore(cam.view_dir(), cam.up(), cam.right(), cam.half_extent(),
                                     cam.image_size() * supersample, cam.near_plane(), cam.far_plane(), cam.distance());
  const ImageGrid hi = shade_textured(rasterize(mesh, big), texture);
  const int size = cam.image_size();
  ImageGrid out(3, size, size);
  const double norm = 1.0 / (supersample * supersample);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        double s = 0.0;
        for (int sy = 0; sy < supersample; ++sy)
          for (int sx = 0; sx < supersample; ++sx) s += hi.at(c, y * supersample + sy, x * supersample + sx);
        out.at(c, y, x) = static_cast<float>(s * norm);
      }
  return out;
}

}  // namespace jigsaw3d
