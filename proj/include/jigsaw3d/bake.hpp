#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "jigsaw3d/camera.hpp"
#include "jigsaw3d/error.hpp"
#include "jigsaw3d/image.hpp"
#include "jigsaw3d/mesh.hpp"
#include "jigsaw3d/parallel.hpp"
#include "jigsaw3d/raster.hpp"
#include "jigsaw3d/kdtree.hpp"

namespace jigsaw3d {

struct BakeConfig {
  int resolution = 1024;
  double depth_epsilon = 1e-3;
  double cosine_cutoff = 0.1;
  double blend_power = 2.0;
  int inpaint_knn = 4;
  int dilation_margin = 4;

  void validate() const {
    if (resolution < 1) throw Error(errc::kBakeInvalidConfig, "resolution must be >= 1");
    if (!(depth_epsilon > 0.0)) throw Error(errc::kBakeInvalidConfig, "depth_epsilon must be positive");
    if (!(cosine_cutoff >= 0.0 && cosine_cutoff < 1.0)) throw Error(errc::kBakeInvalidConfig, "cosine_cutoff must lie in [0, 1)");
    if (!(blend_power >= 0.0)) throw Error(errc::kBakeInvalidConfig, "blend_power must be >= 0");
    if (inpaint_knn < 1) throw Error(errc::kBakeInvalidConfig, "inpaint_knn must be >= 1");
    if (dilation_margin < 0) throw Error(errc::kBakeInvalidConfig, "dilation_margin must be >= 0");
  }
};

/// Surface point behind every texel of the UV atlas. Texel (x, y) has its
/// center at UV ((x + 0.5) / R, 1 - (y + 0.5) / R), so row 0 is the top of
/// the texture image.
struct FootprintMap {
  int resolution = 0;
  std::vector<std::uint8_t> valid;
  std::vector<Vec3> world_pos;
  std::vector<Vec3> normal;
  std::vector<int> tri_id;
  std::vector<std::array<double, 3>> barycentric;
  std::vector<int> degenerate_triangles;
  /// Triangles that hit at least one texel already claimed by an earlier one.
  int overlapping_triangles = 0;

  std::size_t texels() const noexcept { return valid.size(); }
  std::size_t valid_count() const { return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), 1)); }
};

/// UV-space rasterisation of the mesh (same fixed-point top-left rules as
/// the screen rasteriser). Overlapping charts keep the first triangle.
inline FootprintMap rasterize_uv_geometry(const TriangleMesh& mesh, int resolution) {
  mesh.require_uvs();
  if (resolution < 1) throw Error(errc::kBakeInvalidConfig, "resolution must be >= 1");
  FootprintMap fp;
  fp.resolution = resolution;
  const std::size_t n = static_cast<std::size_t>(resolution) * resolution;
  fp.valid.assign(n, 0);
  fp.world_pos.assign(n, {});
  fp.normal.assign(n, {});
  fp.tri_id.assign(n, -1);
  fp.barycentric.assign(n, {0.0, 0.0, 0.0});

  std::array<std::int64_t, 3> w{};
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const Triangle& tri = mesh.triangles[t];
    std::array<Vec2, 3> pts{};
    for (int k = 0; k < 3; ++k) {
      const Vec2 uv = mesh.uvs[tri[k].uv];
      pts[k] = {uv.x * resolution, (1.0 - uv.y) * resolution};
    }
    const ScreenTriangle st = setup_screen_triangle(pts, {0.0, 0.0, 0.0});
    if (st.area == 0) {
      fp.degenerate_triangles.push_back(t);
      continue;
    }
    bool overlapped = false;
    const int x0 = std::max(st.min_x, 0), x1 = std::min(st.max_x, resolution - 1);
    const int y0 = std::max(st.min_y, 0), y1 = std::min(st.max_y, resolution - 1);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        if (!cover_test(st, pixel_center(x, y), w)) continue;
        const std::size_t i = static_cast<std::size_t>(y) * resolution + x;
        if (fp.valid[i]) {
          overlapped = true;
          continue;
        }
        const auto b = barycentric_weights(st, w);
        Vec3 p{}, nrm{};
        for (int k = 0; k < 3; ++k) {
          p = p + b[k] * mesh.positions[tri[k].position];
          nrm = nrm + b[k] * mesh.normals[tri[k].normal];
        }
        fp.valid[i] = 1;
        fp.world_pos[i] = p;
        fp.normal[i] = normalized(nrm);
        fp.tri_id[i] = t;
        fp.barycentric[i] = b;
      }
    if (overlapped) ++fp.overlapping_triangles;
  }
  return fp;
}

struct UVAtlas {
  int resolution = 0;
  std::vector<std::array<double, 3>> accum_color;
  std::vector<double> accum_weight;
  std::vector<int> observations;

  explicit UVAtlas(int r = 0)
      : resolution(r),
        accum_color(static_cast<std::size_t>(r) * r, {0.0, 0.0, 0.0}),
        accum_weight(accum_color.size(), 0.0),
        observations(accum_color.size(), 0) {}
};

/// One view's contribution to one texel, or nullopt-like `accepted == false`.
struct TexelSample {
  bool accepted = false;
  double weight = 0.0;
  std::array<double, 3> color{};
};

/// Visibility-tested lookup of world point `p` (normal `n`) in one view.
/// The stored depth and color are bilinear over the 2x2 pixel neighbourhood,
/// restricted to pixels whose depth lies within a slope allowance of the
/// point's depth; the point is then accepted only if its depth is within
/// depth_epsilon of that stored depth.
inline TexelSample sample_view(const ImageGrid& view, const Camera& cam, const DepthMap& depth, Vec3 p, Vec3 n,
                               const BakeConfig& config) {
  TexelSample s;
  const double cos_theta = dot(n, -cam.view_dir());
  if (!(cos_theta > config.cosine_cutoff)) return s;
  const Projection pr = cam.project(p);
  const int size = view.width();
  if (!(pr.x >= 0.0 && pr.x < size && pr.y >= 0.0 && pr.y < view.height())) return s;

  const double fx = pr.x - 0.5, fy = pr.y - 0.5;
  const int x0 = static_cast<int>(std::floor(fx)), y0 = static_cast<int>(std::floor(fy));
  const double tx = fx - x0, ty = fy - y0;
  const double neighbour_tol = config.depth_epsilon + 2.0 * cam.pixel_size();
  double wsum = 0.0, dsum = 0.0;
  std::array<double, 3> csum{};
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i) {
      const int x = x0 + i, y = y0 + j;
      if (x < 0 || y < 0 || x >= size || y >= view.height()) continue;
      const double d = depth.at(x, y);
      if (!std::isfinite(d) || std::abs(d - pr.depth) > neighbour_tol) continue;
      const double w = (i ? tx : 1.0 - tx) * (j ? ty : 1.0 - ty);
      if (w <= 0.0) continue;
      wsum += w;
      dsum += w * d;
      for (int c = 0; c < 3; ++c) csum[c] += w * view.at(c, y, x);
    }
  if (!(wsum > 0.0)) return s;
  if (std::abs(pr.depth - dsum / wsum) > config.depth_epsilon) return s;
  s.accepted = true;
  s.weight = std::pow(cos_theta, config.blend_power);
  for (int c = 0; c < 3; ++c) s.color[c] = csum[c] / wsum;
  return s;
}

inline UVAtlas reproject(const std::vector<ImageGrid>& views, const std::vector<Camera>& cameras,
                         const std::vector<DepthMap>& depths, const FootprintMap& footprints, const BakeConfig& config) {
  config.validate();
  if (views.size() != cameras.size() || views.size() != depths.size()) {
    throw Error(errc::kCountMismatch, "views, cameras and depth maps must have the same count (" +
                                          std::to_string(views.size()) + ", " + std::to_string(cameras.size()) + ", " +
                                          std::to_string(depths.size()) + ")");
  }
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (views[v].channels() != 3) throw Error(errc::kChannelMismatch, "views must have 3 channels");
    if (views[v].width() != depths[v].width || views[v].height() != depths[v].height)
      throw Error(errc::kCountMismatch, "view " + std::to_string(v) + " and its depth map differ in size");
  }
  UVAtlas atlas(footprints.resolution);
  parallel_for(footprints.texels(), [&](std::size_t i) {
    if (!footprints.valid[i]) return;
    for (std::size_t v = 0; v < views.size(); ++v) {
      const TexelSample s = sample_view(views[v], cameras[v], depths[v], footprints.world_pos[i], footprints.normal[i], config);
      if (!s.accepted) continue;
      for (int c = 0; c < 3; ++c) atlas.accum_color[i][c] += s.weight * s.color[c];
      atlas.accum_weight[i] += s.weight;
      atlas.observations[i] += 1;
    }
  });
  return atlas;
}

struct AlbedoState {
  ImageGrid albedo;
  std::vector<std::uint8_t> valid;
};

/// Normalises accumulated colors; unobserved texels stay 0 and invalid.
inline AlbedoState fuse(const UVAtlas& atlas) {
  const int r = atlas.resolution;
  AlbedoState out{ImageGrid(3, r, r), std::vector<std::uint8_t>(atlas.observations.size(), 0)};
  for (std::size_t i = 0; i < atlas.observations.size(); ++i) {
    if (atlas.observations[i] == 0 || !(atlas.accum_weight[i] > 0.0)) continue;
    out.valid[i] = 1;
    for (int c = 0; c < 3; ++c)
      out.albedo.data()[c * out.albedo.plane_size() + i] =
          static_cast<float>(std::clamp(atlas.accum_color[i][c] / atlas.accum_weight[i], 0.0, 1.0));
  }
  return out;
}

/// Fills observed-invalid surface texels with the inverse-distance weighted
/// average (weight 1 / (d + 1e-6)) of their k nearest valid texels by world
/// position. Returns the number of texels filled.
inline std::size_t inpaint_3d(AlbedoState& state, const FootprintMap& footprints, const BakeConfig& config) {
  std::vector<Vec3> points;
  std::vector<int> ids;
  for (std::size_t i = 0; i < footprints.texels(); ++i) {
    if (!footprints.valid[i] || !state.valid[i]) continue;
    points.push_back(footprints.world_pos[i]);
    ids.push_back(static_cast<int>(i));
  }
  if (points.empty()) throw Error(errc::kNoValidTexels, "no observed texels to inpaint from");
  const KdTree tree(points, ids);

  const std::size_t plane = state.albedo.plane_size();
  std::vector<std::uint8_t> filled(footprints.texels(), 0);
  const ImageGrid source = state.albedo;
  parallel_for(footprints.texels(), [&](std::size_t i) {
    if (!footprints.valid[i] || state.valid[i]) return;
    const auto nn = tree.nearest(footprints.world_pos[i], config.inpaint_knn);
    double wsum = 0.0;
    std::array<double, 3> csum{};
    for (const Neighbor& nb : nn) {
      const double w = 1.0 / (nb.distance + 1e-6);
      wsum += w;
      for (int c = 0; c < 3; ++c) csum[c] += w * source.data()[c * plane + nb.id];
    }
    for (int c = 0; c < 3; ++c) state.albedo.data()[c * plane + i] = static_cast<float>(csum[c] / wsum);
    filled[i] = 1;
  });
  std::size_t count = 0;
  for (std::size_t i = 0; i < filled.size(); ++i)
    if (filled[i]) {
      state.valid[i] = 1;
      ++count;
    }
  return count;
}

/// Seam dilation: texels with no surface behind them, within
/// dilation_margin 8-connected steps of a valid texel, copy the nearest
/// valid texel (ties by lower texel index). Only surface-free texels are
/// written or traversed. Returns the number of texels filled.
inline std::size_t inpaint_uv(AlbedoState& state, const FootprintMap& footprints, const BakeConfig& config) {
  const int r = footprints.resolution;
  const std::size_t n = footprints.texels();
  std::vector<int> dist(n, -1), src(n, -1);
  std::vector<int> frontier;
  for (std::size_t i = 0; i < n; ++i)
    if (state.valid[i]) {
      dist[i] = 0;
      src[i] = static_cast<int>(i);
      frontier.push_back(static_cast<int>(i));
    }
  std::vector<int> next;
  for (int level = 1; level <= config.dilation_margin && !frontier.empty(); ++level) {
    next.clear();
    for (int f : frontier) {
      const int fx = f % r, fy = f / r;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int x = fx + dx, y = fy + dy;
          if ((dx == 0 && dy == 0) || x < 0 || y < 0 || x >= r || y >= r) continue;
          const int j = y * r + x;
          if (footprints.valid[j]) continue;
          if (dist[j] == -1) {
            dist[j] = level;
            src[j] = src[f];
            next.push_back(j);
          } else if (dist[j] == level && src[f] < src[j]) {
            src[j] = src[f];
          }
        }
    }
    frontier.swap(next);
  }
  const std::size_t plane = state.albedo.plane_size();
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (dist[i] <= 0) continue;
    for (int c = 0; c < 3; ++c) state.albedo.data()[c * plane + i] = state.albedo.data()[c * plane + src[i]];
    state.valid[i] = 1;
    ++count;
  }
  return count;
}

/// Tangent frame of a triangle from its UV derivatives, Gram-Schmidt
/// orthogonalised against the face normal. Falls back to an arbitrary
/// frame around the face normal when the UV area is zero.
struct TangentFrame {
  Vec3 tangent, bitangent, normal;
  bool degenerate = false;
};

inline TangentFrame tangent_frame(const TriangleMesh& mesh, int tri_index) {
  const Triangle& tri = mesh.triangles[tri_index];
  const Vec3 p0 = mesh.positions[tri[0].position], p1 = mesh.positions[tri[1].position],
             p2 = mesh.positions[tri[2].position];
  const Vec2 t0 = mesh.uvs[tri[0].uv], t1 = mesh.uvs[tri[1].uv], t2 = mesh.uvs[tri[2].uv];
  TangentFrame f;
  f.normal = normalized(cross(p1 - p0, p2 - p0));
  if (length(f.normal) == 0.0) f.normal = {0.0, 0.0, 1.0};
  const Vec3 e1 = p1 - p0, e2 = p2 - p0;
  const Vec2 d1 = t1 - t0, d2 = t2 - t0;
  const double det = d1.x * d2.y - d2.x * d1.y;
  Vec3 t{};
  if (std::abs(det) > 1e-14) {
    const Vec3 raw = (1.0 / det) * (d2.y * e1 - d1.y * e2);
    t = normalized(raw - dot(raw, f.normal) * f.normal);
  }
  if (length(t) == 0.0) {
    f.degenerate = true;
    const Vec3 axis = std::abs(f.normal.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    t = normalized(axis - dot(axis, f.normal) * f.normal);
    f.tangent = t;
    f.bitangent = cross(f.normal, t);
    return f;
  }
  const Vec3 raw_b = (1.0 / det) * (d1.x * e2 - d2.x * e1);
  const double handedness = dot(cross(f.normal, t), raw_b) < 0.0 ? -1.0 : 1.0;
  f.tangent = t;
  f.bitangent = handedness * cross(f.normal, t);
  return f;
}

/// Shading normals expressed in the face tangent frame, encoded (n + 1) / 2.
/// Texels without surface get the flat value (0.5, 0.5, 1).
inline ImageGrid bake_tangent_normals(const TriangleMesh& mesh, const FootprintMap& footprints) {
  mesh.require_uvs();
  const int r = footprints.resolution;
  ImageGrid out(3, r, r);
  std::fill(out.plane(0).begin(), out.plane(0).end(), 0.5f);
  std::fill(out.plane(1).begin(), out.plane(1).end(), 0.5f);
  std::fill(out.plane(2).begin(), out.plane(2).end(), 1.0f);
  std::vector<TangentFrame> frames(mesh.triangles.size());
  for (std::size_t t = 0; t < frames.size(); ++t) frames[t] = tangent_frame(mesh, static_cast<int>(t));
  const std::size_t plane = out.plane_size();
  for (std::size_t i = 0; i < footprints.texels(); ++i) {
    if (!footprints.valid[i]) continue;
    const TangentFrame& f = frames[footprints.tri_id[i]];
    const Vec3 n = footprints.normal[i];
    const Vec3 local = normalized(Vec3{dot(n, f.tangent), dot(n, f.bitangent), dot(n, f.normal)});
    for (int c = 0; c < 3; ++c) out.data()[c * plane + i] = static_cast<float>((local[c] + 1.0) * 0.5);
  }
  return out;
}

struct CoverageReport {
  std::size_t texels = 0;
  std::size_t surface_texels = 0;
  std::size_t observed = 0;
  std::size_t filled_3d = 0;
  std::size_t filled_uv = 0;
  std::size_t degenerate_uv_triangles = 0;
  std::size_t overlapping_uv_triangles = 0;

  double fraction(std::size_t k) const noexcept { return texels ? static_cast<double>(k) / texels : 0.0; }
  double observed_fraction() const noexcept { return fraction(observed); }
  double filled_3d_fraction() const noexcept { return fraction(filled_3d); }
  double filled_uv_fraction() const noexcept { return fraction(filled_uv); }
  /// Surface texels left without a color; zero after a full bake.
  std::size_t unfilled_surface = 0;
};

struct BakeResult {
  ImageGrid albedo;
  ImageGrid normals;
  std::vector<std::uint8_t> observed;
  std::vector<std::uint8_t> valid;
  FootprintMap footprints;
  CoverageReport coverage;
};

/// Full pipeline: UV footprints, reprojection, fusion, surface inpainting,
/// seam dilation, tangent-space normals.
inline BakeResult bake(const TriangleMesh& mesh, const std::vector<ImageGrid>& views, const std::vector<Camera>& cameras,
                       const std::vector<DepthMap>& depths, const BakeConfig& config) {
  config.validate();
  BakeResult out;
  out.footprints = rasterize_uv_geometry(mesh, config.resolution);
  const UVAtlas atlas = reproject(views, cameras, depths, out.footprints, config);
  AlbedoState state = fuse(atlas);
  out.observed = state.valid;
  CoverageReport& cov = out.coverage;
  cov.texels = out.footprints.texels();
  cov.surface_texels = out.footprints.valid_count();
  cov.observed = static_cast<std::size_t>(std::count(state.valid.begin(), state.valid.end(), 1));
  cov.degenerate_uv_triangles = out.footprints.degenerate_triangles.size();
  cov.overlapping_uv_triangles = static_cast<std::size_t>(out.footprints.overlapping_triangles);
  cov.filled_3d = inpaint_3d(state, out.footprints, config);
  cov.filled_uv = inpaint_uv(state, out.footprints, config);
  for (std::size_t i = 0; i < cov.texels; ++i)
    if (out.footprints.valid[i] && !state.valid[i]) ++cov.unfilled_surface;
  out.albedo = std::move(state.albedo);
  out.valid = std::move(state.valid);
  out.normals = bake_tangent_normals(mesh, out.footprints);
  return out;
}

}  // namespace jigsaw3d
