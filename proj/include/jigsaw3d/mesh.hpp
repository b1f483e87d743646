#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "jigsaw3d/error.hpp"
#include "jigsaw3d/vec.hpp"

namespace jigsaw3d {

/// Indices into the mesh's position / normal / uv arrays. uv is -1 when the
/// source face had no texture coordinate.
struct Corner {
  int position = 0;
  int normal = 0;
  int uv = -1;
  friend bool operator==(const Corner&, const Corner&) = default;
};

using Triangle = std::array<Corner, 3>;

struct TriangleMesh {
  std::vector<Vec3> positions;
  std::vector<Vec3> normals;
  std::vector<Vec2> uvs;
  std::vector<Triangle> triangles;

  /// True when every triangle corner references a texture coordinate.
  bool has_uvs() const {
    return std::all_of(triangles.begin(), triangles.end(), [](const Triangle& t) {
      return t[0].uv >= 0 && t[1].uv >= 0 && t[2].uv >= 0;
    });
  }

  void require_uvs() const {
    if (!has_uvs()) throw Error(errc::kMissingUVs, "mesh has faces without texture coordinates");
  }

  Vec3 face_normal(int tri) const {
    const Triangle& t = triangles[tri];
    const Vec3 a = positions[t[0].position], b = positions[t[1].position], c = positions[t[2].position];
    return normalized(cross(b - a, c - a));
  }

  friend bool operator==(const TriangleMesh&, const TriangleMesh&) = default;
};

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& source, int line, const std::string& what) {
  throw Error(errc::kParseError, source + ":" + std::to_string(line) + ": " + what);
}

inline double parse_double(std::string_view tok, const std::string& source, int line) {
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) parse_fail(source, line, "bad number '" + std::string(tok) + "'");
  return v;
}

// OBJ indices are 1-based; negative values count back from the current end.
inline int resolve_index(std::string_view tok, std::size_t count, const std::string& source, int line) {
  long v = 0;
  const auto* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc{} || ptr != end || v == 0) parse_fail(source, line, "bad index '" + std::string(tok) + "'");
  const long idx = v > 0 ? v - 1 : static_cast<long>(count) + v;
  if (idx < 0 || idx >= static_cast<long>(count)) {
    parse_fail(source, line, "index " + std::to_string(v) + " out of range (" + std::to_string(count) + " available)");
  }
  return static_cast<int>(idx);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

}  // namespace detail

/// Parses Wavefront OBJ (v / vn / vt / f; other records are ignored).
/// Polygons are fan-triangulated. Normals are renormalised; faces without
/// normals get their geometric face normal.
inline TriangleMesh parse_obj(std::istream& in, const std::string& source = "<obj>") {
  TriangleMesh mesh;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const auto toks = detail::split_ws(std::string_view(line).substr(0, hash));
    if (toks.empty()) continue;
    const std::string_view kw = toks[0];
    if (kw == "v") {
      if (toks.size() < 4) detail::parse_fail(source, line_no, "vertex needs 3 coordinates");
      mesh.positions.push_back({detail::parse_double(toks[1], source, line_no),
                                detail::parse_double(toks[2], source, line_no),
                                detail::parse_double(toks[3], source, line_no)});
    } else if (kw == "vn") {
      if (toks.size() < 4) detail::parse_fail(source, line_no, "normal needs 3 coordinates");
      const Vec3 n{detail::parse_double(toks[1], source, line_no), detail::parse_double(toks[2], source, line_no),
                   detail::parse_double(toks[3], source, line_no)};
      if (length(n) == 0.0) detail::parse_fail(source, line_no, "zero-length normal");
      mesh.normals.push_back(normalized(n));
    } else if (kw == "vt") {
      if (toks.size() < 3) detail::parse_fail(source, line_no, "texture coordinate needs 2 values");
      mesh.uvs.push_back({detail::parse_double(toks[1], source, line_no), detail::parse_double(toks[2], source, line_no)});
    } else if (kw == "f") {
      if (toks.size() < 4) detail::parse_fail(source, line_no, "face needs at least 3 vertices");
      std::vector<Corner> poly;
      bool needs_face_normal = false;
      for (std::size_t k = 1; k < toks.size(); ++k) {
        std::array<std::string_view, 3> parts{};
        std::size_t part = 0, start = 0;
        const std::string_view tok = toks[k];
        for (std::size_t i = 0; i <= tok.size(); ++i) {
          if (i == tok.size() || tok[i] == '/') {
            if (part > 2) detail::parse_fail(source, line_no, "bad face vertex '" + std::string(tok) + "'");
            parts[part++] = tok.substr(start, i - start);
            start = i + 1;
          }
        }
        Corner c;
        c.position = detail::resolve_index(parts[0], mesh.positions.size(), source, line_no);
        c.uv = parts[1].empty() ? -1 : detail::resolve_index(parts[1], mesh.uvs.size(), source, line_no);
        if (parts[2].empty()) {
          c.normal = -1;
          needs_face_normal = true;
        } else {
          c.normal = detail::resolve_index(parts[2], mesh.normals.size(), source, line_no);
        }
        poly.push_back(c);
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        Triangle tri{poly[0], poly[k], poly[k + 1]};
        if (needs_face_normal) {
          const Vec3 a = mesh.positions[tri[0].position], b = mesh.positions[tri[1].position],
                     c = mesh.positions[tri[2].position];
          Vec3 n = normalized(cross(b - a, c - a));
          if (length(n) == 0.0) n = {0.0, 0.0, 1.0};
          const int idx = static_cast<int>(mesh.normals.size());
          mesh.normals.push_back(n);
          for (Corner& corner : tri)
            if (corner.normal < 0) corner.normal = idx;
        }
        mesh.triangles.push_back(tri);
      }
    }
  }
  return mesh;
}

inline TriangleMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::kParseError, "cannot open mesh '" + path.string() + "'");
  return parse_obj(in, path.string());
}

/// Writes v / vt / vn / f records with round-trip precision.
inline void write_obj(std::ostream& out, const TriangleMesh& mesh) {
  out << std::setprecision(17);
  for (const Vec3& p : mesh.positions) out << "v " << p.x << ' ' << p.y << ' ' << p.z << '\n';
  for (const Vec2& t : mesh.uvs) out << "vt " << t.x << ' ' << t.y << '\n';
  for (const Vec3& n : mesh.normals) out << "vn " << n.x << ' ' << n.y << ' ' << n.z << '\n';
  for (const Triangle& tri : mesh.triangles) {
    out << 'f';
    for (const Corner& c : tri) {
      out << ' ' << c.position + 1 << '/';
      if (c.uv >= 0) out << c.uv + 1;
      out << '/' << c.normal + 1;
    }
    out << '\n';
  }
}

inline void save_mesh(const std::filesystem::path& path, const TriangleMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw Error(errc::kIoError, "cannot write mesh '" + path.string() + "'");
  write_obj(out, mesh);
}

struct BoundingBox {
  Vec3 min{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity()};
  Vec3 max{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity()};

  void extend(Vec3 p) {
    for (int i = 0; i < 3; ++i) {
      min[i] = std::min(min[i], p[i]);
      max[i] = std::max(max[i], p[i]);
    }
  }
  Vec3 center() const { return 0.5 * (min + max); }
  double max_extent() const { return std::max({max.x - min.x, max.y - min.y, max.z - min.z}); }
};

inline BoundingBox bounding_box(const TriangleMesh& mesh) {
  BoundingBox box;
  for (const Vec3& p : mesh.positions) box.extend(p);
  return box;
}

/// Centers the bounding box at the origin and scales uniformly so the
/// longest side is 1. Normals are unaffected by a uniform scale.
inline TriangleMesh normalize_mesh(const TriangleMesh& mesh) {
  if (mesh.positions.empty()) throw Error(errc::kEmptyMesh, "cannot normalize a mesh without vertices");
  const BoundingBox box = bounding_box(mesh);
  const Vec3 center = box.center();
  const double extent = box.max_extent();
  const double scale = extent > 0.0 ? 1.0 / extent : 1.0;
  TriangleMesh out = mesh;
  for (Vec3& p : out.positions) p = scale * (p - center);
  return out;
}

}  // namespace jigsaw3d
