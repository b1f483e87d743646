#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <system_error>
#include <vector>

#include "jigsaw3d/camera.hpp"
#include "jigsaw3d/error.hpp"
#include "jigsaw3d/image.hpp"
#include "jigsaw3d/jigsaw.hpp"
#include "jigsaw3d/mesh.hpp"
#include "jigsaw3d/png_io.hpp"
#include "jigsaw3d/raster.hpp"
#include "jigsaw3d/rng.hpp"
#include "jigsaw3d/serialize.hpp"

namespace jigsaw3d {

inline constexpr int kManifestVersion = 1;

struct DatasetOptions {
  int image_size = kDefaultImageSize;
  int reference_views = kRandomReferenceViews;
  double half_extent = kDefaultHalfExtent;
  ElevationRange elevation{};
};

struct TargetView {
  ImageGrid color;
  ImageGrid position;
  ImageGrid normal;
};

struct ReferenceView {
  ImageGrid raw;
  ImageGrid jigsawed;
  PatchPermutation permutation;
  MaskPattern mask;
  /// The config actually applied: mask_ratio is this reference's draw.
  JigsawConfig config;
};

struct SamplePair {
  std::string mesh_id;
  std::uint64_t seed = 0;
  /// patch size, background, and the upper bound for per-reference mask
  /// ratios.
  JigsawConfig jigsaw_config;
  std::vector<TargetView> targets;
  std::vector<ReferenceView> references;
  std::vector<Camera> target_cameras;
  std::vector<Camera> reference_cameras;
  std::optional<std::string> caption;
};

/// Random streams under a sample seed.
enum class SampleStream : std::uint64_t { kReferenceCameras = 0, kMaskRatios = 1, kJigsawBase = 100 };

/// Renders the six orthogonal targets and `reference_views` random-view
/// references, jigsawing each reference in train mode with a mask ratio
/// drawn uniformly from [0, jigsaw_config.mask_ratio]. The mesh is
/// normalised first. Every image is snapped to the 16-bit grid so a dataset
/// written to PNG reads back identically.
inline SamplePair make_sample(const TriangleMesh& mesh, const ImageGrid& texture, const JigsawConfig& jigsaw_config,
                              std::uint64_t seed, std::string mesh_id = "mesh", const DatasetOptions& options = {}) {
  mesh.require_uvs();
  if (texture.channels() != 3) throw Error(errc::kChannelMismatch, "texture must have 3 channels");
  jigsaw_config.validate();
  const TriangleMesh norm = normalize_mesh(mesh);

  SamplePair s;
  s.mesh_id = std::move(mesh_id);
  s.seed = seed;
  s.jigsaw_config = jigsaw_config;
  s.jigsaw_config.seed = seed;
  s.target_cameras = orthogonal_cameras(options.image_size, options.half_extent);
  for (const Camera& cam : s.target_cameras) {
    const GBuffer gb = rasterize(norm, cam);
    TargetView t{shade_textured(gb, texture), encode_position_map(gb), encode_normal_map(gb)};
    quantize16(t.color);
    quantize16(t.position);
    quantize16(t.normal);
    s.targets.push_back(std::move(t));
  }

  s.reference_cameras =
      random_view_cameras(options.reference_views, derive_seed(seed, static_cast<std::uint64_t>(SampleStream::kReferenceCameras)),
                          options.elevation, options.half_extent, options.image_size);
  Xoshiro256 ratio_rng(derive_seed(seed, static_cast<std::uint64_t>(SampleStream::kMaskRatios)));
  for (std::size_t j = 0; j < s.reference_cameras.size(); ++j) {
    ReferenceView ref;
    ref.raw = shade_textured(rasterize(norm, s.reference_cameras[j]), texture);
    quantize16(ref.raw);
    ref.config = jigsaw_config;
    ref.config.mask_ratio = jigsaw_config.mask_ratio * ratio_rng.uniform();
    ref.config.seed = derive_seed(seed, static_cast<std::uint64_t>(SampleStream::kJigsawBase) + j);
    JigsawOutput jig = jigsaw(ref.raw, ref.config, JigsawMode::kTrain);
    quantize16(jig.image);
    ref.jigsawed = std::move(jig.image);
    ref.permutation = std::move(jig.permutation);
    ref.mask = std::move(jig.mask);
    s.references.push_back(std::move(ref));
  }
  return s;
}

struct ManifestEntry {
  std::string mesh_id;
  std::vector<std::string> files;
  std::uint64_t seed = 0;
  JigsawConfig config;
};

struct Manifest {
  int version = kManifestVersion;
  std::vector<ManifestEntry> samples;
};

namespace detail {

inline std::string target_file(std::size_t k, const char* kind) {
  return "target_" + std::to_string(k) + "_" + kind + ".png";
}
inline std::string reference_file(std::size_t j, const char* kind) {
  return "ref_" + std::to_string(j) + "_" + kind + ".png";
}

inline Json sample_meta(const SamplePair& s) {
  Json refs = Json::array();
  for (const ReferenceView& r : s.references)
    refs.push_back(Json{{"config", to_json(r.config)}, {"permutation", to_json(r.permutation)}, {"mask", to_json(r.mask)}});
  Json cams = Json::array();
  for (const Camera& c : s.target_cameras) cams.push_back(to_json(c));
  Json ref_cams = Json::array();
  for (const Camera& c : s.reference_cameras) ref_cams.push_back(to_json(c));
  return Json{{"mesh_id", s.mesh_id},
              {"seed", s.seed},
              {"jigsaw_config", to_json(s.jigsaw_config)},
              {"target_cameras", cams},
              {"reference_cameras", ref_cams},
              {"references", refs},
              {"caption", s.caption ? Json(*s.caption) : Json(nullptr)}};
}

inline ImageGrid read_required_png(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(errc::kMissingFile, "missing file '" + path.string() + "'");
  return read_png(path);
}

}  // namespace detail

/// Writes every sample under root/<mesh_id>/ as 16-bit PNGs plus meta.json,
/// then root/manifest.json.
inline Manifest write_dataset(const std::vector<SamplePair>& samples, const std::filesystem::path& root) {
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  if (ec) throw Error(errc::kIoError, "cannot create '" + root.string() + "': " + ec.message());
  Manifest manifest;
  std::set<std::string> ids;
  for (const SamplePair& s : samples) {
    if (!ids.insert(s.mesh_id).second) throw Error(errc::kIoError, "duplicate mesh id '" + s.mesh_id + "'");
    const std::filesystem::path dir = root / s.mesh_id;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(errc::kIoError, "cannot create '" + dir.string() + "': " + ec.message());
    ManifestEntry entry{s.mesh_id, {}, s.seed, s.jigsaw_config};
    auto put = [&](const std::string& name, const ImageGrid& img) {
      write_png(dir / name, img, BitDepth::k16);
      entry.files.push_back(s.mesh_id + "/" + name);
    };
    for (std::size_t k = 0; k < s.targets.size(); ++k) {
      put(detail::target_file(k, "color"), s.targets[k].color);
      put(detail::target_file(k, "position"), s.targets[k].position);
      put(detail::target_file(k, "normal"), s.targets[k].normal);
    }
    for (std::size_t j = 0; j < s.references.size(); ++j) {
      put(detail::reference_file(j, "raw"), s.references[j].raw);
      put(detail::reference_file(j, "jigsaw"), s.references[j].jigsawed);
    }
    write_json(dir / "meta.json", detail::sample_meta(s));
    entry.files.push_back(s.mesh_id + "/meta.json");
    manifest.samples.push_back(std::move(entry));
  }
  Json entries = Json::array();
  for (const ManifestEntry& e : manifest.samples)
    entries.push_back(Json{{"mesh_id", e.mesh_id}, {"files", e.files}, {"seed", e.seed}, {"config", to_json(e.config)}});
  write_json(root / "manifest.json", Json{{"version", manifest.version}, {"samples", entries}});
  return manifest;
}

inline std::vector<SamplePair> read_dataset(const std::filesystem::path& root) {
  const Json manifest = read_json(root / "manifest.json");
  std::vector<SamplePair> out;
  try {
    const int version = manifest.at("version").get<int>();
    if (version != kManifestVersion) {
      throw Error(errc::kVersionMismatch, "manifest version " + std::to_string(version) + " is not supported (expected " +
                                              std::to_string(kManifestVersion) + ")");
    }
    for (const Json& e : manifest.at("samples")) {
      for (const Json& f : e.at("files"))
        if (!std::filesystem::exists(root / f.get<std::string>()))
          throw Error(errc::kMissingFile, "missing file '" + (root / f.get<std::string>()).string() + "'");
      const std::string id = e.at("mesh_id").get<std::string>();
      const std::filesystem::path dir = root / id;
      const Json meta = read_json(dir / "meta.json");
      SamplePair s;
      s.mesh_id = id;
      s.seed = meta.at("seed").get<std::uint64_t>();
      s.jigsaw_config = jigsaw_config_from_json(meta.at("jigsaw_config"));
      for (const Json& c : meta.at("target_cameras")) s.target_cameras.push_back(camera_from_json(c));
      for (const Json& c : meta.at("reference_cameras")) s.reference_cameras.push_back(camera_from_json(c));
      if (!meta.at("caption").is_null()) s.caption = meta.at("caption").get<std::string>();
      for (std::size_t k = 0; k < s.target_cameras.size(); ++k) {
        s.targets.push_back({detail::read_required_png(dir / detail::target_file(k, "color")),
                             detail::read_required_png(dir / detail::target_file(k, "position")),
                             detail::read_required_png(dir / detail::target_file(k, "normal"))});
      }
      const Json& refs = meta.at("references");
      for (std::size_t j = 0; j < refs.size(); ++j) {
        ReferenceView r;
        r.raw = detail::read_required_png(dir / detail::reference_file(j, "raw"));
        r.jigsawed = detail::read_required_png(dir / detail::reference_file(j, "jigsaw"));
        r.config = jigsaw_config_from_json(refs[j].at("config"));
        r.permutation = permutation_from_json(refs[j].at("permutation"));
        r.mask = mask_from_json(refs[j].at("mask"));
        s.references.push_back(std::move(r));
      }
      out.push_back(std::move(s));
    }
  } catch (const Json::exception& e) {
    throw Error(errc::kCorruptManifest, std::string("malformed dataset metadata: ") + e.what());
  }
  return out;
}

}  // namespace jigsaw3d
