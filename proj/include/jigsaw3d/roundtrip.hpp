#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "jigsaw3d/bake.hpp"
#include "jigsaw3d/camera.hpp"
#include "jigsaw3d/image.hpp"
#include "jigsaw3d/mesh.hpp"
#include "jigsaw3d/raster.hpp"

namespace jigsaw3d {

inline constexpr double kRoundTripTolerance = 2.0 / 255.0;

struct RoundTripOptions {
  int view_size = kDefaultImageSize;
  BakeConfig bake{};
};

struct RoundTripReport {
  /// Mean abs error over observed texels and channels, baked vs. source
  /// texture sampled at the texel center.
  double mean_abs_error = 0.0;
  /// Mean abs error between the input views and the same views re-rendered
  /// with the baked texture, over covered pixels.
  double rerender_error = 0.0;
  CoverageReport coverage;
  bool passed = false;
};

struct RoundTripRun {
  RoundTripReport report;
  BakeResult bake;
  std::vector<ImageGrid> views;
  std::vector<Camera> cameras;
};

/// Renders the six orthogonal views of the normalised mesh, bakes them back
/// into a texture and compares against the source.
inline RoundTripRun roundtrip_run(const TriangleMesh& mesh, const ImageGrid& texture, const RoundTripOptions& options = {}) {
  mesh.require_uvs();
  if (texture.channels() != 3) throw Error(errc::kChannelMismatch, "texture must have 3 channels");
  options.bake.validate();
  const TriangleMesh norm = normalize_mesh(mesh);
  RoundTripRun run;
  run.cameras = orthogonal_cameras(options.view_size);
  std::vector<GBuffer> gbuffers;
  std::vector<DepthMap> depths;
  for (const Camera& cam : run.cameras) {
    gbuffers.push_back(rasterize(norm, cam));
    run.views.push_back(shade_textured(gbuffers.back(), texture));
    depths.push_back(depth_map(gbuffers.back()));
  }
  run.bake = bake(norm, run.views, run.cameras, depths, options.bake);

  RoundTripReport& r = run.report;
  r.coverage = run.bake.coverage;
  const int res = options.bake.resolution;
  const std::size_t plane = static_cast<std::size_t>(res) * res;
  double err = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < res; ++y)
    for (int x = 0; x < res; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * res + x;
      if (!run.bake.observed[i]) continue;
      const double u = (x + 0.5) / res, v = 1.0 - (y + 0.5) / res;
      for (int c = 0; c < 3; ++c) err += std::abs(run.bake.albedo.data()[c * plane + i] - sample_uv(texture, c, u, v));
      n += 3;
    }
  r.mean_abs_error = n ? err / n : 0.0;

  double rerr = 0.0;
  std::size_t rn = 0;
  for (std::size_t k = 0; k < gbuffers.size(); ++k) {
    const ImageGrid again = shade_textured(gbuffers[k], run.bake.albedo);
    const std::size_t pp = again.plane_size();
    for (std::size_t i = 0; i < pp; ++i) {
      if (!gbuffers[k].covered(i)) continue;
      for (int c = 0; c < 3; ++c) rerr += std::abs(again.data()[c * pp + i] - run.views[k].data()[c * pp + i]);
      rn += 3;
    }
  }
  r.rerender_error = rn ? rerr / rn : 0.0;
  r.passed = n > 0 && r.mean_abs_error < kRoundTripTolerance;
  return run;
}

inline RoundTripReport roundtrip(const TriangleMesh& mesh, const ImageGrid& texture, const RoundTripOptions& options = {}) {
  return roundtrip_run(mesh, texture, options).report;
}

}  // namespace jigsaw3d
