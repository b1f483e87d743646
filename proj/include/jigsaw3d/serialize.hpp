#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "jigsaw3d/bake.hpp"
#include "jigsaw3d/camera.hpp"
#include "jigsaw3d/error.hpp"
#include "jigsaw3d/jigsaw.hpp"
#include "jigsaw3d/style_metrics.hpp"

namespace jigsaw3d {

using Json = nlohmann::json;

// Doubles are written with max_digits10, so every value here round-trips
// bit for bit.

inline Json to_json(Vec3 v) { return Json::array({v.x, v.y, v.z}); }

inline Vec3 vec3_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(errc::kCorruptManifest, "expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline Json to_json(const Camera& cam) {
  return Json{{"kind", "orthographic"},
              {"view_dir", to_json(cam.view_dir())},
              {"up", to_json(cam.up())},
              {"right", to_json(cam.right())},
              {"half_extent", cam.half_extent()},
              {"image_size", cam.image_size()},
              {"near", cam.near_plane()},
              {"far", cam.far_plane()},
              {"distance", cam.distance()}};
}

inline Camera camera_from_json(const Json& j) {
  try {
    if (j.at("kind").get<std::string>() != "orthographic")
      throw Error(errc::kInvalidCamera, "only orthographic cameras are supported");
    return Camera::restore(vec3_from_json(j.at("view_dir")), vec3_from_json(j.at("up")), vec3_from_json(j.at("right")),
                           j.at("half_extent").get<double>(), j.at("image_size").get<int>(), j.at("near").get<double>(),
                           j.at("far").get<double>(), j.at("distance").get<double>());
  } catch (const Json::exception& e) {
    throw Error(errc::kCorruptManifest, std::string("bad camera record: ") + e.what());
  }
}

inline Json cameras_to_json(const std::vector<Camera>& cams) {
  Json arr = Json::array();
  for (const Camera& c : cams) arr.push_back(to_json(c));
  return Json{{"cameras", arr}};
}

inline std::vector<Camera> cameras_from_json(const Json& j) {
  std::vector<Camera> cams;
  if (!j.contains("cameras") || !j["cameras"].is_array()) throw Error(errc::kCorruptManifest, "missing 'cameras' array");
  for (const Json& c : j["cameras"]) cams.push_back(camera_from_json(c));
  return cams;
}

inline Json to_json(const JigsawConfig& c) {
  return Json{{"patch_size", c.patch_size}, {"mask_ratio", c.mask_ratio}, {"background", c.background}, {"seed", c.seed}};
}

inline JigsawConfig jigsaw_config_from_json(const Json& j) {
  JigsawConfig c;
  c.patch_size = j.at("patch_size").get<int>();
  c.mask_ratio = j.at("mask_ratio").get<double>();
  c.background = j.at("background").get<std::vector<float>>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

inline Json to_json(const PatchPermutation& p) {
  return Json{{"rows", p.rows}, {"cols", p.cols}, {"mapping", p.mapping}};
}

inline PatchPermutation permutation_from_json(const Json& j) {
  PatchPermutation p{j.at("rows").get<int>(), j.at("cols").get<int>(), j.at("mapping").get<std::vector<int>>()};
  if (!p.is_bijection()) throw Error(errc::kCorruptManifest, "recorded permutation is not a bijection");
  return p;
}

inline Json to_json(const MaskPattern& m) {
  std::vector<int> visible(m.visible.begin(), m.visible.end());
  return Json{{"rows", m.rows}, {"cols", m.cols}, {"visible", visible}};
}

inline MaskPattern mask_from_json(const Json& j) {
  MaskPattern m{j.at("rows").get<int>(), j.at("cols").get<int>(), {}};
  for (int v : j.at("visible").get<std::vector<int>>()) m.visible.push_back(v != 0);
  if (m.visible.size() != static_cast<std::size_t>(m.rows) * m.cols)
    throw Error(errc::kCorruptManifest, "mask size does not match its grid");
  return m;
}

inline Json to_json(const StyleDistanceReport& r) {
  return Json{{"gram", r.gram}, {"adain", r.adain}, {"mean_gram", r.mean_gram}, {"mean_adain", r.mean_adain}};
}

inline Json to_json(const CoverageReport& c) {
  return Json{{"texels", c.texels},
              {"surface_texels", c.surface_texels},
              {"observed", c.observed},
              {"filled_3d", c.filled_3d},
              {"filled_uv", c.filled_uv},
              {"unfilled_surface", c.unfilled_surface},
              {"observed_fraction", c.observed_fraction()},
              {"filled_3d_fraction", c.filled_3d_fraction()},
              {"filled_uv_fraction", c.filled_uv_fraction()},
              {"degenerate_uv_triangles", c.degenerate_uv_triangles},
              {"overlapping_uv_triangles", c.overlapping_uv_triangles}};
}

inline Json to_json(const BakeConfig& c) {
  return Json{{"resolution", c.resolution},       {"depth_epsilon", c.depth_epsilon},
              {"cosine_cutoff", c.cosine_cutoff}, {"blend_power", c.blend_power},
              {"inpaint_knn", c.inpaint_knn},     {"dilation_margin", c.dilation_margin}};
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error(errc::kIoError, "cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw Error(errc::kIoError, "failed writing '" + path.string() + "'");
}

inline Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::kMissingFile, "missing file '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(errc::kCorruptManifest, "cannot parse '" + path.string() + "': " + e.what());
  }
}

}  // namespace jigsaw3d
