#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "jigsaw3d/image.hpp"
#include "jigsaw3d/mesh.hpp"
#include "jigsaw3d/rng.hpp"

namespace jigsaw3d {

using Color = std::array<float, 3>;

/// Unit cube centered at the origin with flat normals. Each face owns one
/// cell of a 3x2 UV atlas, shrunk by `inset` UV units on every side; u runs
/// along the face tangent and v along its bitangent.
inline TriangleMesh make_uv_cube(double inset = 2.0 / 1024.0) {
  struct Face {
    Vec3 n, t, b;
  };
  static constexpr Face kFaces[] = {
      {{1, 0, 0}, {0, 0, -1}, {0, 1, 0}}, {{-1, 0, 0}, {0, 0, 1}, {0, 1, 0}},
      {{0, 1, 0}, {1, 0, 0}, {0, 0, -1}}, {{0, -1, 0}, {1, 0, 0}, {0, 0, 1}},
      {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}},  {{0, 0, -1}, {-1, 0, 0}, {0, 1, 0}},
  };
  static constexpr int kCorners[4][2] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  TriangleMesh mesh;
  for (int f = 0; f < 6; ++f) {
    const Face& face = kFaces[f];
    const double u0 = (f % 3) / 3.0 + inset, u1 = (f % 3 + 1) / 3.0 - inset;
    const double v0 = (f / 3) / 2.0 + inset, v1 = (f / 3 + 1) / 2.0 - inset;
    const int base_p = static_cast<int>(mesh.positions.size());
    const int base_t = static_cast<int>(mesh.uvs.size());
    mesh.normals.push_back(face.n);
    for (const auto& k : kCorners) {
      mesh.positions.push_back(0.5 * face.n + (0.5 * k[0]) * face.t + (0.5 * k[1]) * face.b);
      mesh.uvs.push_back({k[0] < 0 ? u0 : u1, k[1] < 0 ? v0 : v1});
    }
    auto corner = [&](int k) { return Corner{base_p + k, f, base_t + k}; };
    mesh.triangles.push_back({corner(0), corner(1), corner(2)});
    mesh.triangles.push_back({corner(0), corner(2), corner(3)});
  }
  return mesh;
}

/// Latitude-longitude sphere of radius 0.5 with smooth normals; u follows
/// longitude (seam duplicated), v follows latitude from the south pole.
inline TriangleMesh make_uv_sphere(int segments = 64, int rings = 32) {
  TriangleMesh mesh;
  for (int r = 0; r <= rings; ++r) {
    const double theta = std::numbers::pi * r / rings;  // 0 at south pole
    for (int s = 0; s <= segments; ++s) {
      const double phi = 2.0 * std::numbers::pi * s / segments;
      const Vec3 n{std::sin(theta) * std::sin(phi), -std::cos(theta), std::sin(theta) * std::cos(phi)};
      mesh.positions.push_back(0.5 * n);
      mesh.normals.push_back(n);
      mesh.uvs.push_back({static_cast<double>(s) / segments, static_cast<double>(r) / rings});
    }
  }
  auto id = [&](int r, int s) {
    const int i = r * (segments + 1) + s;
    return Corner{i, i, i};
  };
  for (int r = 0; r < rings; ++r)
    for (int s = 0; s < segments; ++s) {
      // Pole rows would give a zero-area triangle; drop it.
      if (r > 0) mesh.triangles.push_back({id(r, s), id(r, s + 1), id(r + 1, s + 1)});
      if (r + 1 < rings) mesh.triangles.push_back({id(r, s), id(r + 1, s + 1), id(r + 1, s)});
    }
  return mesh;
}

/// Axis-aligned quad in the plane z = `z`, facing +Z, with UV (0,0) at
/// (x0, y0) and (1,1) at (x1, y1).
inline TriangleMesh make_quad(double x0, double y0, double x1, double y1, double z) {
  TriangleMesh mesh;
  mesh.positions = {{x0, y0, z}, {x1, y0, z}, {x1, y1, z}, {x0, y1, z}};
  mesh.uvs = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  mesh.normals = {{0, 0, 1}};
  mesh.triangles = {{Corner{0, 0, 0}, Corner{1, 0, 1}, Corner{2, 0, 2}},
                    {Corner{0, 0, 0}, Corner{2, 0, 2}, Corner{3, 0, 3}}};
  return mesh;
}

/// Concatenates meshes, re-basing indices.
inline TriangleMesh merge_meshes(const std::vector<TriangleMesh>& parts) {
  TriangleMesh out;
  for (const TriangleMesh& m : parts) {
    const int bp = static_cast<int>(out.positions.size()), bn = static_cast<int>(out.normals.size()),
              bt = static_cast<int>(out.uvs.size());
    out.positions.insert(out.positions.end(), m.positions.begin(), m.positions.end());
    out.normals.insert(out.normals.end(), m.normals.begin(), m.normals.end());
    out.uvs.insert(out.uvs.end(), m.uvs.begin(), m.uvs.end());
    for (Triangle t : m.triangles) {
      for (Corner& c : t) {
        c.position += bp;
        c.normal += bn;
        if (c.uv >= 0) c.uv += bt;
      }
      out.triangles.push_back(t);
    }
  }
  return out;
}

inline ImageGrid checkerboard(int size, int cells, Color a, Color b) {
  ImageGrid img(3, size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const bool odd = ((x * cells / size) + (y * cells / size)) % 2 != 0;
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = odd ? b[c] : a[c];
    }
  return img;
}

inline ImageGrid solid_color(int size, Color color) {
  ImageGrid img(3, size, size);
  for (int c = 0; c < 3; ++c) std::fill(img.plane(c).begin(), img.plane(c).end(), color[c]);
  return img;
}

/// Smooth value noise: a `lattice` x `lattice` grid of random values per
/// channel in [lo, hi], interpolated with a smoothstep kernel.
inline ImageGrid value_noise(int size, std::uint64_t seed, int lattice = 8, float lo = 0.15f, float hi = 0.85f) {
  Xoshiro256 rng(seed);
  const int n = lattice + 1;
  std::vector<double> grid(static_cast<std::size_t>(3) * n * n);
  for (double& g : grid) g = lo + (hi - lo) * rng.uniform();
  ImageGrid img(3, size, size);
  auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double gx = (x + 0.5) * lattice / size, gy = (y + 0.5) * lattice / size;
      const int ix = std::min(static_cast<int>(gx), lattice - 1), iy = std::min(static_cast<int>(gy), lattice - 1);
      const double fx = smooth(gx - ix), fy = smooth(gy - iy);
      for (int c = 0; c < 3; ++c) {
        auto g = [&](int yy, int xx) { return grid[(static_cast<std::size_t>(c) * n + yy) * n + xx]; };
        const double top = (1 - fx) * g(iy, ix) + fx * g(iy, ix + 1);
        const double bot = (1 - fx) * g(iy + 1, ix) + fx * g(iy + 1, ix + 1);
        img.at(c, y, x) = static_cast<float>((1 - fy) * top + fy * bot);
      }
    }
  return img;
}

/// Per-pixel uniform noise in [lo, hi] per channel.
inline ImageGrid white_noise(int size, std::uint64_t seed, float lo = 0.0f, float hi = 1.0f) {
  Xoshiro256 rng(seed);
  ImageGrid img(3, size, size);
  for (float& v : img.data()) v = static_cast<float>(lo + (hi - lo) * rng.uniform());
  return img;
}

/// Sinusoidal stripes at `angle` radians with `period` pixels, blending
/// between two colors.
inline ImageGrid stripes(int size, double period, double angle, Color a, Color b) {
  ImageGrid img(3, size, size);
  const double cx = std::cos(angle), sy = std::sin(angle);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double t = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * (x * cx + y * sy) / period);
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = static_cast<float>((1 - t) * a[c] + t * b[c]);
    }
  return img;
}

}  // namespace jigsaw3d
