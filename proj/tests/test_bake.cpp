#include <gtest/gtest.h>

#include <cmath>

#include "bake_fixtures.hpp"
#include "jigsaw3d/bake.hpp"
#include "jigsaw3d/parallel.hpp"
#include "test_helpers.hpp"

namespace jigsaw3d {
namespace {

using testing::render_views;
using testing::two_plane_scene;

// Nearest surface depth along the view ray through `p` (Moller-Trumbore over
// every triangle), or +inf.
double ray_surface_depth(const TriangleMesh& mesh, const Camera& cam, Vec3 p) {
  const Vec3 dir = cam.view_dir();
  const Vec3 origin = p - 10.0 * dir;
  double best = std::numeric_limits<double>::infinity();
  for (const Triangle& tri : mesh.triangles) {
    const Vec3 a = mesh.positions[tri[0].position], b = mesh.positions[tri[1].position], c = mesh.positions[tri[2].position];
    const Vec3 e1 = b - a, e2 = c - a, h = cross(dir, e2);
    const double det = dot(e1, h);
    if (std::abs(det) < 1e-15) continue;
    const Vec3 s = origin - a;
    const double u = dot(s, h) / det;
    const Vec3 q = cross(s, e1);
    const double v = dot(dir, q) / det;
    if (u < 0 || v < 0 || u + v > 1) continue;
    const double t = dot(e2, q) / det;
    best = std::min(best, dot(origin + t * dir, dir) + cam.distance());
  }
  return best;
}

BakeConfig small_config(int resolution) {
  BakeConfig cfg;
  cfg.resolution = resolution;
  return cfg;
}

FootprintMap manual_footprints(int r) {
  FootprintMap fp;
  fp.resolution = r;
  const std::size_t n = static_cast<std::size_t>(r) * r;
  fp.valid.assign(n, 0);
  fp.world_pos.assign(n, {});
  fp.normal.assign(n, {0, 0, 1});
  fp.tri_id.assign(n, -1);
  fp.barycentric.assign(n, {});
  return fp;
}

AlbedoState blank_state(int r) { return {ImageGrid(3, r, r), std::vector<std::uint8_t>(static_cast<std::size_t>(r) * r, 0)}; }

void set_color(AlbedoState& s, std::size_t i, Color c) {
  for (int k = 0; k < 3; ++k) s.albedo.data()[k * s.albedo.plane_size() + i] = c[k];
  s.valid[i] = 1;
}

float color_at(const AlbedoState& s, std::size_t i, int k) { return s.albedo.data()[k * s.albedo.plane_size() + i]; }

TEST(UVGeometry, QuadIsAffineInTexelCoordinates) {
  const TriangleMesh quad = make_quad(-0.5, -0.5, 0.5, 0.5, 0.25);
  const FootprintMap fp = rasterize_uv_geometry(quad, 64);
  EXPECT_EQ(fp.valid_count(), 64u * 64u);
  EXPECT_TRUE(fp.degenerate_triangles.empty());
  EXPECT_EQ(fp.overlapping_triangles, 0);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * 64 + x;
      EXPECT_NEAR(fp.world_pos[i].x, (x + 0.5) / 64.0 - 0.5, 1e-12);
      EXPECT_NEAR(fp.world_pos[i].y, 0.5 - (y + 0.5) / 64.0, 1e-12);
      EXPECT_NEAR(fp.world_pos[i].z, 0.25, 1e-12);
      EXPECT_NEAR(length(fp.normal[i]), 1.0, 1e-12);
    }
}

TEST(UVGeometry, MissingUVsAndDegenerates) {
  TriangleMesh no_uv = make_quad(0, 0, 1, 1, 0);
  for (Triangle& t : no_uv.triangles)
    for (Corner& c : t) c.uv = -1;
  try {
    rasterize_uv_geometry(no_uv, 8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kMissingUVs);
  }
  TriangleMesh degenerate = make_quad(0, 0, 1, 1, 0);
  degenerate.uvs.push_back({0.5, 0.5});
  degenerate.triangles[1][1].uv = 4;
  degenerate.triangles[1][2].uv = 4;
  const FootprintMap fp = rasterize_uv_geometry(degenerate, 16);
  EXPECT_EQ(fp.degenerate_triangles, std::vector<int>{1});
}

TEST(UVGeometry, OverlapKeepsFirst) {
  const TriangleMesh both = merge_meshes({make_quad(0, 0, 1, 1, 0.1), make_quad(0, 0, 1, 1, -0.1)});
  const FootprintMap fp = rasterize_uv_geometry(both, 16);
  EXPECT_EQ(fp.overlapping_triangles, 2);
  for (std::size_t i = 0; i < fp.texels(); ++i) {
    EXPECT_LT(fp.tri_id[i], 2);
    EXPECT_NEAR(fp.world_pos[i].z, 0.1, 1e-15);
  }
}

TEST(Reproject, FrontFacingQuadSingleObservation) {
  const TriangleMesh quad = make_quad(-0.5, -0.5, 0.5, 0.5, 0.0);
  const std::vector<Camera> cams{orthogonal_cameras(64, 0.5)[4]};
  const auto rv = render_views(quad, value_noise(64, 2), cams);
  BakeConfig cfg = small_config(32);
  cfg.blend_power = 0.0;
  const FootprintMap fp = rasterize_uv_geometry(quad, 32);
  const UVAtlas atlas = reproject(rv.colors, cams, rv.depths, fp, cfg);
  for (std::size_t i = 0; i < fp.texels(); ++i) {
    EXPECT_EQ(atlas.observations[i], 1);
    EXPECT_EQ(atlas.accum_weight[i], 1.0);
  }
}

TEST(Reproject, GrazingViewsSkipped) {
  const TriangleMesh quad = make_quad(-0.5, -0.5, 0.5, 0.5, 0.0);
  // cos = 0.05 against the +Z normal.
  const double s = 0.05;
  const Camera grazing({0.0, -std::sqrt(1 - s * s), -s}, {0, 0, 1}, 0.6, 64);
  const auto rv = render_views(quad, value_noise(64, 2), {grazing});
  const FootprintMap fp = rasterize_uv_geometry(quad, 16);
  const UVAtlas atlas = reproject(rv.colors, {grazing}, rv.depths, fp, small_config(16));
  for (int obs : atlas.observations) EXPECT_EQ(obs, 0);
}

TEST(Reproject, OccludedTexelsNeverContribute) {
  // Small scenes of random quads: a texel hidden behind another surface by
  // more than depth_epsilon must be rejected by every view.
  const BakeConfig cfg = small_config(48);
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Xoshiro256 rng(seed);
    std::vector<TriangleMesh> parts;
    for (int q = 0; q < 5; ++q) {
      const double x = rng.uniform(-0.4, 0.1), y = rng.uniform(-0.4, 0.1), z = rng.uniform(-0.4, 0.4);
      TriangleMesh quad = make_quad(x, y, x + rng.uniform(0.15, 0.35), y + rng.uniform(0.15, 0.35), z);
      for (Vec2& uv : quad.uvs) uv = {(q + uv.x) / 5.0, uv.y};
      parts.push_back(quad);
    }
    const TriangleMesh mesh = merge_meshes(parts);
    const auto cams = random_view_cameras(3, seed + 10, {10.0, 60.0}, 0.55, 96);
    std::vector<Camera> facing;
    for (const Camera& c : cams) facing.emplace_back(Vec3{c.view_dir().x, c.view_dir().y, -std::abs(c.view_dir().z)}, Vec3{0, 1, 0}, 0.55, 96);
    const auto rv = render_views(mesh, value_noise(64, seed), facing);
    const FootprintMap fp = rasterize_uv_geometry(mesh, cfg.resolution);
    std::size_t occluded = 0;
    for (std::size_t v = 0; v < facing.size(); ++v)
      for (std::size_t i = 0; i < fp.texels(); ++i) {
        if (!fp.valid[i]) continue;
        const Vec3 p = fp.world_pos[i];
        // Occluded at the point and across its whole bilinear footprint, so
        // the pixel grid cannot resolve any visible sliver.
        bool hidden = true;
        const double px = facing[v].pixel_size();
        for (int dy = -1; dy <= 1 && hidden; ++dy)
          for (int dx = -1; dx <= 1 && hidden; ++dx) {
            const Vec3 q = p + (1.5 * dx * px) * facing[v].right() + (1.5 * dy * px) * facing[v].up();
            // Depth of the texel's own tangent plane along the ray through q.
            const Vec3 dir = facing[v].view_dir();
            const double t = dot(p - q, fp.normal[i]) / dot(dir, fp.normal[i]);
            const double own_q = facing[v].project(q + t * dir).depth;
            hidden = ray_surface_depth(mesh, facing[v], q) < own_q - cfg.depth_epsilon;
          }
        if (hidden) {
          ++occluded;
          EXPECT_FALSE(sample_view(rv.colors[v], facing[v], rv.depths[v], p, fp.normal[i], cfg).accepted)
              << "seed " << seed << " view " << v << " texel " << i;
        }
      }
    EXPECT_GT(occluded, 0u) << "fixture should contain occlusion";
  }
}

TEST(Reproject, TwoPlaneRearHiddenFromFrontView) {
  const TriangleMesh scene = two_plane_scene();
  const auto cams = orthogonal_cameras(128);
  const auto rv = render_views(scene, value_noise(64, 3), cams);
  const FootprintMap fp = rasterize_uv_geometry(scene, 64);
  const UVAtlas atlas = reproject(rv.colors, cams, rv.depths, fp, small_config(64));
  for (std::size_t i = 0; i < fp.texels(); ++i) {
    if (testing::is_rear_triangle(fp.tri_id[i])) EXPECT_EQ(atlas.observations[i], 0);
    else EXPECT_EQ(atlas.observations[i], 1);
  }
}

TEST(Reproject, CountMismatch) {
  const TriangleMesh quad = make_quad(-0.5, -0.5, 0.5, 0.5, 0.0);
  const FootprintMap fp = rasterize_uv_geometry(quad, 8);
  try {
    reproject({ImageGrid(3, 8, 8)}, {}, {}, fp, small_config(8));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kCountMismatch);
  }
}

TEST(Fuse, WeightedAverage) {
  UVAtlas atlas(2);
  atlas.accum_color[0] = {0.25, 0.5, 0.75};
  atlas.accum_weight[0] = 1.0;
  atlas.observations[0] = 1;
  const double w1 = 0.3, w2 = 0.9;
  const Color c1{0.1f, 0.9f, 0.4f}, c2{0.7f, 0.2f, 0.6f};
  for (int k = 0; k < 3; ++k) atlas.accum_color[1][k] = w1 * c1[k] + w2 * c2[k];
  atlas.accum_weight[1] = w1 + w2;
  atlas.observations[1] = 2;
  const AlbedoState s = fuse(atlas);
  EXPECT_EQ(s.valid, (std::vector<std::uint8_t>{1, 1, 0, 0}));
  EXPECT_EQ(color_at(s, 0, 0), 0.25f);
  EXPECT_EQ(color_at(s, 0, 2), 0.75f);
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(color_at(s, 1, k), (w1 * c1[k] + w2 * c2[k]) / (w1 + w2), 1e-7);
    EXPECT_EQ(color_at(s, 2, k), 0.0f);
  }
}

TEST(Inpaint3D, SingleSourceCopied) {
  FootprintMap fp = manual_footprints(4);
  for (std::size_t i = 0; i < 16; ++i) {
    fp.valid[i] = 1;
    fp.world_pos[i] = {0.1 * (i % 4), 0.1 * (i / 4), 0.0};
  }
  AlbedoState s = blank_state(4);
  set_color(s, 5, {0.2f, 0.4f, 0.6f});
  EXPECT_EQ(inpaint_3d(s, fp, small_config(4)), 15u);
  for (std::size_t i = 0; i < 16; ++i)
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(color_at(s, i, k), (Color{0.2f, 0.4f, 0.6f})[k], 1e-6);
}

TEST(Inpaint3D, EquidistantSourcesAverage) {
  FootprintMap fp = manual_footprints(2);
  fp.valid = {1, 1, 1, 0};
  fp.world_pos[0] = {-0.25, 0, 0};
  fp.world_pos[1] = {0.25, 0, 0};
  fp.world_pos[2] = {0, 0.1, 0};
  AlbedoState s = blank_state(2);
  set_color(s, 0, {1, 0, 0});
  set_color(s, 1, {0, 0, 1});
  BakeConfig cfg = small_config(2);
  cfg.inpaint_knn = 2;
  inpaint_3d(s, fp, cfg);
  EXPECT_NEAR(color_at(s, 2, 0), 0.5, 1e-6);
  EXPECT_NEAR(color_at(s, 2, 2), 0.5, 1e-6);
  EXPECT_EQ(s.valid[3], 0);
}

TEST(Inpaint3D, MatchesBruteForceKnn) {
  const int r = 24;
  FootprintMap fp = manual_footprints(r);
  AlbedoState s = blank_state(r);
  Xoshiro256 rng(31);
  for (std::size_t i = 0; i < fp.texels(); ++i) {
    fp.valid[i] = rng.bernoulli(0.9);
    fp.world_pos[i] = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    if (fp.valid[i] && rng.bernoulli(0.3))
      set_color(s, i, {static_cast<float>(rng.uniform()), static_cast<float>(rng.uniform()), static_cast<float>(rng.uniform())});
  }
  const AlbedoState before = s;
  BakeConfig cfg = small_config(r);
  cfg.inpaint_knn = 5;
  inpaint_3d(s, fp, cfg);
  for (std::size_t i = 0; i < fp.texels(); ++i) {
    if (before.valid[i]) {
      for (int k = 0; k < 3; ++k) EXPECT_EQ(color_at(s, i, k), color_at(before, i, k));
      continue;
    }
    if (!fp.valid[i]) {
      EXPECT_EQ(s.valid[i], 0);
      continue;
    }
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t j = 0; j < fp.texels(); ++j)
      if (before.valid[j]) all.emplace_back(length(fp.world_pos[j] - fp.world_pos[i]), j);
    std::sort(all.begin(), all.end());
    double wsum = 0.0, c[3] = {0, 0, 0};
    for (int n = 0; n < 5; ++n) {
      const double w = 1.0 / (all[n].first + 1e-6);
      wsum += w;
      for (int k = 0; k < 3; ++k) c[k] += w * color_at(before, all[n].second, k);
    }
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(color_at(s, i, k), c[k] / wsum, 1e-6);
  }
}

TEST(Inpaint3D, FullyValidUnchangedAndEmptyRejected) {
  FootprintMap fp = manual_footprints(3);
  std::fill(fp.valid.begin(), fp.valid.end(), 1);
  AlbedoState s = blank_state(3);
  for (std::size_t i = 0; i < 9; ++i) set_color(s, i, {0.1f * i, 0.5f, 0.2f});
  const AlbedoState before = s;
  EXPECT_EQ(inpaint_3d(s, fp, small_config(3)), 0u);
  EXPECT_EQ(s.albedo, before.albedo);
  AlbedoState none = blank_state(3);
  try {
    inpaint_3d(none, fp, small_config(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kNoValidTexels);
  }
}

TEST(InpaintUV, IslandHaloMatchesDistanceOracle) {
  const int r = 20;
  FootprintMap fp = manual_footprints(r);
  AlbedoState s = blank_state(r);
  Xoshiro256 rng(3);
  for (int y = 7; y < 12; ++y)
    for (int x = 6; x < 13; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * r + x;
      fp.valid[i] = 1;
      set_color(s, i, {static_cast<float>(rng.uniform()), static_cast<float>(rng.uniform()), 0.5f});
    }
  const AlbedoState before = s;
  BakeConfig cfg = small_config(r);
  cfg.dilation_margin = 3;
  const std::size_t filled = inpaint_uv(s, fp, cfg);
  std::size_t expected_filled = 0;
  for (int y = 0; y < r; ++y)
    for (int x = 0; x < r; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * r + x;
      if (before.valid[i]) continue;
      int best = 1 << 30;
      std::size_t src = 0;
      for (std::size_t j = 0; j < fp.texels(); ++j) {
        if (!before.valid[j]) continue;
        const int d = std::max(std::abs(static_cast<int>(j % r) - x), std::abs(static_cast<int>(j / r) - y));
        if (d < best) best = d, src = j;
      }
      if (best <= 3) {
        ++expected_filled;
        ASSERT_EQ(s.valid[i], 1);
        for (int k = 0; k < 3; ++k) EXPECT_EQ(color_at(s, i, k), color_at(before, src, k)) << x << "," << y;
      } else {
        EXPECT_EQ(s.valid[i], 0);
      }
    }
  EXPECT_EQ(filled, expected_filled);
}

TEST(InpaintUV, IdentityCases) {
  const int r = 8;
  FootprintMap fp = manual_footprints(r);
  AlbedoState s = blank_state(r);
  set_color(s, 10, {1, 0, 0});
  fp.valid[10] = 1;
  BakeConfig cfg = small_config(r);
  cfg.dilation_margin = 0;
  AlbedoState copy = s;
  EXPECT_EQ(inpaint_uv(copy, fp, cfg), 0u);
  EXPECT_EQ(copy.albedo, s.albedo);

  AlbedoState full = blank_state(r);
  for (std::size_t i = 0; i < 64; ++i) set_color(full, i, {0.3f, 0.3f, 0.3f});
  const AlbedoState full_before = full;
  EXPECT_EQ(inpaint_uv(full, fp, small_config(r)), 0u);
  EXPECT_EQ(full.albedo, full_before.albedo);
}

TEST(InpaintUV, NeverTouchesSurfaceTexels) {
  const int r = 8;
  FootprintMap fp = manual_footprints(r);
  AlbedoState s = blank_state(r);
  set_color(s, 0, {1, 1, 1});
  fp.valid[0] = 1;
  fp.valid[1] = 1;  // surface but unobserved: a wall for the dilation
  inpaint_uv(s, fp, small_config(r));
  EXPECT_EQ(s.valid[1], 0);
  EXPECT_EQ(color_at(s, 1, 0), 0.0f);
  EXPECT_EQ(s.valid[static_cast<std::size_t>(r)], 1);
}

TEST(TangentNormals, FlatQuadIsUniform) {
  const TriangleMesh quad = make_quad(-0.5, -0.5, 0.5, 0.5, 0.0);
  const ImageGrid n = bake_tangent_normals(quad, rasterize_uv_geometry(quad, 16));
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      EXPECT_NEAR(n.at(0, y, x), 0.5f, 1e-6);
      EXPECT_NEAR(n.at(1, y, x), 0.5f, 1e-6);
      EXPECT_NEAR(n.at(2, y, x), 1.0f, 1e-6);
    }
}

TEST(TangentNormals, SphereDecodesToUnitVectors) {
  const TriangleMesh sphere = make_uv_sphere(32, 16);
  const FootprintMap fp = rasterize_uv_geometry(sphere, 128);
  const ImageGrid n = bake_tangent_normals(sphere, fp);
  for (std::size_t i = 0; i < fp.texels(); ++i) {
    if (!fp.valid[i]) continue;
    const Vec3 d{2.0 * n.data()[i] - 1.0, 2.0 * n.data()[n.plane_size() + i] - 1.0, 2.0 * n.data()[2 * n.plane_size() + i] - 1.0};
    EXPECT_NEAR(length(d), 1.0, 1e-3);
    EXPECT_GT(d.z, 0.9);  // smooth normals stay close to the face normal
  }
}

TEST(TangentNormals, DegenerateUVFallsBack) {
  TriangleMesh quad = make_quad(-0.5, -0.5, 0.5, 0.5, 0.0);
  quad.uvs = {{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}};
  const TangentFrame f = tangent_frame(quad, 0);
  EXPECT_TRUE(f.degenerate);
  EXPECT_NEAR(dot(f.tangent, f.normal), 0.0, 1e-12);
  EXPECT_NEAR(length(f.bitangent), 1.0, 1e-12);
  const TangentFrame ok = tangent_frame(make_quad(-0.5, -0.5, 0.5, 0.5, 0.0), 0);
  EXPECT_FALSE(ok.degenerate);
  EXPECT_NEAR(ok.tangent.x, 1.0, 1e-12);
  EXPECT_NEAR(ok.bitangent.y, 1.0, 1e-12);
}

TEST(Bake, TrivialQuadMatchesDirectWarp) {
  const TriangleMesh quad = make_quad(-0.5, -0.5, 0.5, 0.5, 0.0);
  const Camera cam = orthogonal_cameras(64, 0.55)[4];
  const auto rv = render_views(quad, value_noise(128, 7), {cam});
  const BakeResult r = bake(quad, rv.colors, {cam}, rv.depths, small_config(48));
  EXPECT_EQ(r.coverage.unfilled_surface, 0u);
  for (std::size_t i = 0; i < r.footprints.texels(); ++i) {
    const Projection p = cam.project(r.footprints.world_pos[i]);
    // Interior texels: all four bilinear taps land on the quad.
    if (p.x < 2.5 || p.y < 2.5 || p.x > 61.5 || p.y > 61.5) continue;
    for (int c = 0; c < 3; ++c)
      EXPECT_NEAR(r.albedo.data()[c * r.albedo.plane_size() + i], sample_bilinear(rv.colors[0], c, p.x - 0.5, p.y - 0.5),
                  1e-6);
  }
}

TEST(Bake, SmallRoundTripAndInvariants) {
  const TriangleMesh cube = make_uv_cube(2.0 / 128.0);
  const ImageGrid tex = checkerboard(128, 4, {0.3f, 0.3f, 0.3f}, {0.7f, 0.6f, 0.5f});
  const auto cams = orthogonal_cameras(128);
  const auto rv = render_views(cube, tex, cams);
  const BakeConfig cfg = small_config(128);
  set_max_threads(1);
  const BakeResult serial = bake(cube, rv.colors, cams, rv.depths, cfg);
  set_max_threads(4);
  const BakeResult parallel = bake(cube, rv.colors, cams, rv.depths, cfg);
  set_max_threads(0);
  EXPECT_EQ(serial.albedo, parallel.albedo);
  EXPECT_EQ(serial.normals, parallel.normals);
  for (float v : serial.albedo.data()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
  double err = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < serial.observed.size(); ++i) {
    if (!serial.observed[i]) continue;
    for (int c = 0; c < 3; ++c) err += std::abs(serial.albedo.data()[c * tex.plane_size() + i] - tex.data()[c * tex.plane_size() + i]);
    n += 3;
  }
  EXPECT_GT(serial.coverage.observed_fraction(), 0.6);
  EXPECT_LT(err / n, 2.0 / 255.0);
  EXPECT_EQ(serial.coverage.unfilled_surface, 0u);
}

TEST(Bake, ZeroViewsAndBadConfig) {
  const TriangleMesh quad = make_quad(-0.5, -0.5, 0.5, 0.5, 0.0);
  try {
    bake(quad, {}, {}, {}, small_config(8));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), errc::kNoValidTexels);
  }
  BakeConfig bad = small_config(8);
  bad.depth_epsilon = 0.0;
  EXPECT_THROW(bake(quad, {}, {}, {}, bad), Error);
}

}  // namespace
}  // namespace jigsaw3d
