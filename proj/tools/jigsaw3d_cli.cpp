// jigsaw3d command line: one subcommand per pipeline stage plus a
// render -> bake -> compare round trip.
//
// Exit codes: 0 success, 1 user error (bad flag, bad input, failed check),
// 2 internal error. Errors print exactly one line to stderr:
//   error: <code>: <message>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jigsaw3d/jigsaw3d.hpp"

namespace {

using namespace jigsaw3d;
namespace fs = std::filesystem;

namespace cli_errc {
constexpr const char* kUnknownFlag = "cli.UnknownFlag";
constexpr const char* kParseError = "cli.ParseError";
constexpr const char* kMissingFlag = "cli.MissingFlag";
constexpr const char* kUnknownConfigKey = "cli.UnknownConfigKey";
constexpr const char* kInvalidValue = "cli.InvalidValue";
constexpr const char* kCheckFailed = "cli.CheckFailed";
constexpr const char* kInternal = "cli.InternalError";
}  // namespace cli_errc

void print_error(const std::string& code, std::string message) {
  std::replace(message.begin(), message.end(), '\n', ' ');
  std::cerr << "error: " << code << ": " << message << std::endl;
}

template <class T>
struct JsonValue {
  static T load(const Json& j) { return j.get<T>(); }
  static Json dump(const T& v) { return Json(v); }
};

template <class T>
struct JsonValue<std::optional<T>> {
  static std::optional<T> load(const Json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<T>();
  }
  static Json dump(const std::optional<T>& v) { return v ? Json(*v) : Json(nullptr); }
};

/// A subcommand whose settings can come from flags or a JSON config file.
/// Every setting is registered under its flag name, which is also its
/// config key; flags win over the file.
class Command {
public:
  Command(CLI::App& root, const std::string& name, const std::string& description)
      : app_(root.add_subcommand(name, description)) {
    app_->add_option("--config", config_path_, "JSON file of settings keyed by flag name");
    app_->add_flag("--print-config", print_config_, "print the resolved settings as JSON and exit");
    param("threads", threads_, "worker thread cap, 0 = all cores");
    param("log-level", log_level_, "quiet, info or debug");
  }
  virtual ~Command() = default;

  CLI::App* app() const { return app_; }
  const std::string& name() const { return app_->get_name(); }

  int execute() {
    load_config();
    if (log_level_ != "quiet" && log_level_ != "info" && log_level_ != "debug")
      throw Error(cli_errc::kInvalidValue, "--log-level must be quiet, info or debug");
    finalize();
    set_max_threads(threads_);
    if (print_config_) {
      std::cout << resolved().dump(2) << std::endl;
      return 0;
    }
    info("config " + resolved().dump());
    return run();
  }

protected:
  template <class T>
  CLI::Option* param(const std::string& key, T& var, const std::string& description) {
    CLI::Option* opt = app_->add_option("--" + key, var, description);
    if constexpr (!std::is_same_v<T, std::string>) opt->capture_default_str();
    params_.push_back({key, opt, [&var](const Json& j) { var = JsonValue<T>::load(j); },
                       [&var] { return JsonValue<T>::dump(var); }});
    return opt;
  }

  CLI::Option* flag(const std::string& key, bool& var, const std::string& description) {
    CLI::Option* opt = app_->add_flag("--" + key, var, description);
    params_.push_back({key, opt, [&var](const Json& j) { var = j.get<bool>(); }, [&var] { return Json(var); }});
    return opt;
  }

  void bake_params(BakeConfig& cfg) {
    param("resolution", cfg.resolution, "texture atlas size in texels");
    param("depth-eps", cfg.depth_epsilon, "visibility depth tolerance");
    param("cos-cutoff", cfg.cosine_cutoff, "reject samples with n.v below this");
    param("blend-power", cfg.blend_power, "exponent on n.v in the blend weight");
    param("knn", cfg.inpaint_knn, "neighbours for 3D inpainting");
    param("margin", cfg.dilation_margin, "UV seam dilation in texels");
  }

  /// Fills defaults that depend on other settings; runs before echo.
  virtual void finalize() {}
  virtual int run() = 0;

  void info(const std::string& msg) const {
    if (log_level_ != "quiet") std::cerr << name() << ": " << msg << std::endl;
  }
  void debug(const std::string& msg) const {
    if (log_level_ == "debug") std::cerr << name() << ": " << msg << std::endl;
  }

  static void require(const std::string& value, const char* flag) {
    if (value.empty()) throw Error(cli_errc::kMissingFlag, std::string(flag) + " is required");
  }

  Json resolved() const {
    Json j{{"command", name()}};
    for (const Param& p : params_) j[p.key] = p.dump();
    return j;
  }

  /// Writes the resolved settings next to an output, so the run can be
  /// replayed with --config.
  void echo_config(const fs::path& path) const { write_json(path, resolved()); }

  static fs::path sidecar(const fs::path& out, const std::string& suffix) {
    fs::path p = out;
    p.replace_extension();
    return p.string() + suffix;
  }

private:
  struct Param {
    std::string key;
    CLI::Option* option;
    std::function<void(const Json&)> load;
    std::function<Json()> dump;
  };

  void load_config() {
    if (config_path_.empty()) return;
    const Json cfg = read_json(config_path_);
    if (!cfg.is_object()) throw Error(cli_errc::kInvalidValue, "config file must hold a JSON object");
    for (const auto& [key, value] : cfg.items()) {
      if (key == "command") {
        if (value != name()) throw Error(cli_errc::kInvalidValue, "config is for command '" + value.dump() + "'");
        continue;
      }
      auto it = std::find_if(params_.begin(), params_.end(), [&](const Param& p) { return p.key == key; });
      if (it == params_.end()) throw Error(cli_errc::kUnknownConfigKey, "unknown config key '" + key + "'");
      if (it->option->count() > 0) continue;
      try {
        it->load(value);
      } catch (const Json::exception&) {
        throw Error(cli_errc::kInvalidValue, "config key '" + key + "' has the wrong type");
      }
    }
  }

  CLI::App* app_;
  std::string config_path_;
  bool print_config_ = false;
  unsigned threads_ = 0;
  std::string log_level_ = "info";
  std::vector<Param> params_;
};

ImageGrid read_rgb(const std::string& path) { return to_rgb(read_png(path)); }

BitDepth bit_depth(int bits) {
  if (bits == 8) return BitDepth::k8;
  if (bits == 16) return BitDepth::k16;
  throw Error(cli_errc::kInvalidValue, "--bit-depth must be 8 or 16");
}

ImageGrid default_texture() { return checkerboard(1024, 8, {0.15f, 0.2f, 0.25f}, {0.85f, 0.75f, 0.6f}); }

// ---------------------------------------------------------------------------

class JigsawCommand : public Command {
public:
  explicit JigsawCommand(CLI::App& root) : Command(root, "jigsaw", "shuffle and mask the patches of an image") {
    param("in", in_, "input PNG");
    param("out", out_, "output PNG");
    param("patch-size", patch_size_, "patch side S (default 64 train, 128 infer)");
    param("mask-ratio", mask_ratio_, "fraction of patches masked in train mode (default 0.25)");
    param("seed", seed_, "random seed");
    param("mode", mode_, "train or infer");
    param("background", background_, "fill value of masked patches");
    param("bit-depth", bits_, "output PNG bit depth, 8 or 16");
    flag("crop", crop_, "center-crop to a multiple of the patch size first");
    param("dump-perm", dump_perm_, "write the permutation and mask as JSON");
  }

private:
  void finalize() override {
    if (mode_ != "train" && mode_ != "infer") throw Error(cli_errc::kInvalidValue, "--mode must be train or infer");
    const bool train = mode_ == "train";
    if (!patch_size_) patch_size_ = train ? kTrainPatchSize : kInferPatchSize;
    if (!mask_ratio_) mask_ratio_ = train ? kMaxTrainMaskRatio : 0.0;
  }

  int run() override {
    require(in_, "--in");
    require(out_, "--out");
    const BitDepth depth = bit_depth(bits_);
    ImageGrid image = read_png(in_);
    if (crop_) image = center_crop_to_multiple(image, *patch_size_);
    const JigsawConfig cfg{*patch_size_, *mask_ratio_, {background_}, seed_};
    const JigsawMode mode = mode_ == "train" ? JigsawMode::kTrain : JigsawMode::kInfer;
    const JigsawOutput result = jigsaw(image, cfg, mode);
    write_png(out_, result.image, depth);
    if (!dump_perm_.empty()) {
      write_json(dump_perm_, Json{{"mode", to_string(mode)},
                                  {"config", to_json(result.config)},
                                  {"permutation", to_json(result.permutation)},
                                  {"mask", to_json(result.mask)}});
    }
    echo_config(sidecar(out_, ".config.json"));
    info("wrote " + out_ + " (" + std::to_string(result.permutation.rows) + "x" +
         std::to_string(result.permutation.cols) + " patches, " + std::to_string(result.mask.masked_count()) + " masked)");
    return 0;
  }

  std::string in_, out_, mode_ = "train", dump_perm_;
  std::optional<int> patch_size_;
  std::optional<double> mask_ratio_;
  std::uint64_t seed_ = 0;
  float background_ = kDefaultBackground;
  int bits_ = 16;
  bool crop_ = false;
};

// ---------------------------------------------------------------------------

class RenderCommand : public Command {
public:
  explicit RenderCommand(CLI::App& root) : Command(root, "render", "render color and geometry maps of a mesh") {
    param("mesh", mesh_, "input OBJ");
    param("texture", texture_, "texture PNG (default: shaded geometry)");
    param("views", views_, "ortho6 or random:<n>");
    param("seed", seed_, "seed for random views");
    param("size", size_, "image side in pixels");
    param("half-extent", half_extent_, "orthographic half extent");
    param("out", out_, "output directory");
  }

private:
  int run() override {
    require(mesh_, "--mesh");
    require(out_, "--out");
    const TriangleMesh mesh = normalize_mesh(load_mesh(mesh_));
    const std::vector<Camera> cams = cameras();
    std::optional<ImageGrid> texture;
    if (!texture_.empty()) {
      mesh.require_uvs();
      texture = read_rgb(texture_);
    }
    fs::create_directories(out_);
    const fs::path dir(out_);
    for (std::size_t k = 0; k < cams.size(); ++k) {
      const GBuffer gb = rasterize(mesh, cams[k]);
      const std::string stem = "view_" + std::to_string(k) + "_";
      write_png(dir / (stem + "color.png"), texture ? shade_textured(gb, *texture) : shade_geometry(gb, cams[k]),
                BitDepth::k8);
      write_png(dir / (stem + "position.png"), encode_position_map(gb), BitDepth::k16);
      write_png(dir / (stem + "normal.png"), encode_normal_map(gb), BitDepth::k16);
      write_png(dir / (stem + "depth.png"), encode_depth(depth_map(gb), cams[k]), BitDepth::k16);
      debug(stem + ": " + std::to_string(gb.covered_count()) + " covered pixels");
    }
    write_json(dir / "cameras.json", cameras_to_json(cams));
    echo_config(dir / "config.json");
    info("rendered " + std::to_string(cams.size()) + " views to " + out_);
    return 0;
  }

  std::vector<Camera> cameras() const {
    if (size_ < 1) throw Error(cli_errc::kInvalidValue, "--size must be >= 1");
    if (views_ == "ortho6") return orthogonal_cameras(size_, half_extent_);
    const std::string prefix = "random:";
    if (views_.rfind(prefix, 0) == 0) {
      int n = 0;
      std::istringstream in(views_.substr(prefix.size()));
      if (in >> n && in.eof() && n >= 1) return random_view_cameras(n, seed_, {}, half_extent_, size_);
    }
    throw Error(cli_errc::kInvalidValue, "--views must be ortho6 or random:<n> with n >= 1");
  }

  /// Untextured preview: gray Lambert shading with the light at the camera.
  static ImageGrid shade_geometry(const GBuffer& gb, const Camera& cam) {
    ImageGrid img(3, gb.height, gb.width, kBackgroundValue);
    for (std::size_t i = 0; i < gb.tri_id.size(); ++i) {
      if (!gb.covered(i)) continue;
      const float v = static_cast<float>(0.2 + 0.8 * std::abs(dot(gb.normal[i], cam.view_dir())));
      for (int c = 0; c < 3; ++c) img.data()[c * img.plane_size() + i] = v;
    }
    return img;
  }

  std::string mesh_, texture_, views_ = "ortho6", out_;
  std::uint64_t seed_ = 0;
  int size_ = kDefaultImageSize;
  double half_extent_ = kDefaultHalfExtent;
};

// ---------------------------------------------------------------------------

class PairsCommand : public Command {
public:
  explicit PairsCommand(CLI::App& root) : Command(root, "pairs", "build style-texture training pairs") {
    param("meshes", meshes_, "directory of <name>.obj with <name>.png textures");
    param("out", out_, "dataset root");
    param("refs", refs_, "random reference views per mesh");
    param("seed", seed_, "dataset seed");
    param("mask-ratio-max", mask_ratio_max_, "upper bound of the per-reference mask ratio");
    param("patch-size", patch_size_, "jigsaw patch side");
    param("size", size_, "image side in pixels");
    param("background", background_, "fill value of masked patches");
  }

private:
  int run() override {
    require(meshes_, "--meshes");
    require(out_, "--out");
    if (!fs::is_directory(meshes_)) throw Error(errc::kMissingFile, "mesh directory '" + meshes_ + "' not found");
    if (!(mask_ratio_max_ >= 0.0 && mask_ratio_max_ <= kMaxTrainMaskRatio))
      throw Error(cli_errc::kInvalidValue, "--mask-ratio-max must lie in [0, 0.25]");
    std::vector<fs::path> objs;
    for (const auto& e : fs::directory_iterator(meshes_))
      if (e.is_regular_file() && e.path().extension() == ".obj") objs.push_back(e.path());
    std::sort(objs.begin(), objs.end());

    DatasetOptions options;
    options.image_size = size_;
    options.reference_views = refs_;
    const JigsawConfig cfg{patch_size_, mask_ratio_max_, {background_}, seed_};
    std::vector<SamplePair> samples;
    for (std::size_t i = 0; i < objs.size(); ++i) {
      fs::path tex = objs[i];
      tex.replace_extension(".png");
      if (!fs::exists(tex)) throw Error(errc::kMissingFile, "missing texture '" + tex.string() + "'");
      const std::string id = objs[i].stem().string();
      SamplePair s = make_sample(load_mesh(objs[i]), read_rgb(tex.string()), cfg, derive_seed(seed_, i), id, options);
      fs::path caption = objs[i];
      caption.replace_extension(".txt");
      if (fs::exists(caption)) {
        std::ifstream in(caption);
        std::string line;
        std::getline(in, line);
        s.caption = line;
      }
      debug("built sample '" + id + "'");
      samples.push_back(std::move(s));
    }
    const Manifest m = write_dataset(samples, out_);
    echo_config(fs::path(out_) / "config.json");
    info("wrote " + std::to_string(m.samples.size()) + " samples to " + out_);
    return 0;
  }

  std::string meshes_, out_;
  int refs_ = kRandomReferenceViews;
  std::uint64_t seed_ = 0;
  double mask_ratio_max_ = kMaxTrainMaskRatio;
  int patch_size_ = kTrainPatchSize;
  int size_ = kDefaultImageSize;
  float background_ = kDefaultBackground;
};

// ---------------------------------------------------------------------------

class MetricsCommand : public Command {
public:
  explicit MetricsCommand(CLI::App& root) : Command(root, "metrics", "style distances of views to a reference") {
    param("ref", ref_, "reference image");
    param("views", views_, "view images or directories of PNGs");
    param("seed", seed_, "feature bank seed");
    param("out", out_, "report JSON (default: stdout only)");
  }

private:
  int run() override {
    require(ref_, "--ref");
    std::vector<fs::path> paths;
    for (const std::string& v : views_) {
      if (fs::is_directory(v)) {
        std::vector<fs::path> found;
        for (const auto& e : fs::directory_iterator(v))
          if (e.is_regular_file() && e.path().extension() == ".png") found.push_back(e.path());
        std::sort(found.begin(), found.end());
        paths.insert(paths.end(), found.begin(), found.end());
      } else {
        paths.emplace_back(v);
      }
    }
    std::vector<ImageGrid> images;
    for (const fs::path& p : paths) images.push_back(read_rgb(p.string()));
    const FeatureBank bank(seed_);
    const MultiViewStyleReport report = multi_view_style_score(images, read_rgb(ref_), bank);
    Json per_view = Json::array();
    for (std::size_t i = 0; i < report.per_view.size(); ++i)
      per_view.push_back(Json{{"view", paths[i].string()}, {"gram", report.per_view[i].gram}, {"adain", report.per_view[i].adain}});
    const Json j{{"bank_seed", bank.seed()},
                 {"input", "raw pixels in [0, 1], no mean subtraction"},
                 {"per_view", per_view},
                 {"mean_gram", report.mean.gram},
                 {"mean_adain", report.mean.adain}};
    std::cout << j.dump(2) << std::endl;
    if (!out_.empty()) {
      write_json(out_, j);
      echo_config(sidecar(out_, ".config.json"));
    }
    return 0;
  }

  std::string ref_, out_;
  std::vector<std::string> views_;
  std::uint64_t seed_ = kDefaultBankSeed;
};

// ---------------------------------------------------------------------------

class AttnCheckCommand : public Command {
public:
  explicit AttnCheckCommand(CLI::App& root)
      : Command(root, "attn-check", "run the attention invariant and gradient checks") {
    param("seed", seed_, "seed for the random inputs");
    param("trials", options_.trials, "random (query, reference) pairs for the invariants");
    param("probes", options_.grad_probes, "gradient probes");
    param("out", out_, "report JSON (default: stdout only)");
  }

private:
  int run() override {
    if (options_.trials < 1 || options_.grad_probes < 0)
      throw Error(cli_errc::kInvalidValue, "--trials must be >= 1 and --probes >= 0");
    const AttentionCheckReport r = run_attention_checks(seed_, options_);
    const Json j{{"seed", r.seed},
                 {"trials", r.trials},
                 {"grad_probes", r.grad_probes},
                 {"row_stochastic",
                  {{"max_error", r.max_row_sum_error}, {"min_weight", r.min_weight}, {"tolerance", kRowSumTolerance},
                   {"pass", r.row_stochastic_ok()}}},
                 {"convex_hull", {{"max_violation", r.max_hull_violation}, {"tolerance", kHullTolerance}, {"pass", r.hull_ok()}}},
                 {"permutation_invariance", {{"mismatches", r.permutation_mismatches}, {"pass", r.permutation_ok()}}},
                 {"single_reference_collapse", {{"mismatches", r.collapse_mismatches}, {"pass", r.collapse_ok()}}},
                 {"gradient",
                  {{"max_relative_error", r.max_grad_relative_error}, {"tolerance", kGradTolerance}, {"step", kGradStep},
                   {"pass", r.gradient_ok()}}},
                 {"pass", r.passed()}};
    std::cout << j.dump(2) << std::endl;
    if (!out_.empty()) {
      write_json(out_, j);
      echo_config(sidecar(out_, ".config.json"));
    }
    if (!r.passed()) throw Error(cli_errc::kCheckFailed, "attention checks failed");
    return 0;
  }

  std::uint64_t seed_ = 0;
  AttentionCheckOptions options_;
  std::string out_;
};

// ---------------------------------------------------------------------------

class BakeCommand : public Command {
public:
  explicit BakeCommand(CLI::App& root) : Command(root, "bake", "bake rendered views into a UV texture") {
    param("mesh", mesh_, "input OBJ with UVs");
    param("views", views_, "directory with view_<k>_color.png and view_<k>_depth.png");
    param("cameras", cameras_, "cameras.json written by render");
    param("out", out_, "output texture PNG");
    param("normals", normals_, "optional tangent-space normal map PNG");
    param("report", report_, "coverage JSON (default: <out>.coverage.json)");
    param("bit-depth", bits_, "output PNG bit depth, 8 or 16");
    bake_params(config_);
  }

private:
  int run() override {
    require(mesh_, "--mesh");
    require(views_, "--views");
    require(cameras_, "--cameras");
    require(out_, "--out");
    const BitDepth depth = bit_depth(bits_);
    const TriangleMesh mesh = normalize_mesh(load_mesh(mesh_));
    mesh.require_uvs();
    const std::vector<Camera> cams = cameras_from_json(read_json(cameras_));
    std::vector<ImageGrid> colors;
    std::vector<DepthMap> depths;
    const fs::path dir(views_);
    for (std::size_t k = 0; k < cams.size(); ++k) {
      const std::string stem = "view_" + std::to_string(k) + "_";
      for (const char* kind : {"color.png", "depth.png"})
        if (!fs::exists(dir / (stem + kind)))
          throw Error(errc::kMissingFile, "missing file '" + (dir / (stem + kind)).string() + "'");
      colors.push_back(read_rgb((dir / (stem + "color.png")).string()));
      depths.push_back(decode_depth(read_png(dir / (stem + "depth.png")), cams[k]));
    }
    const BakeResult result = bake(mesh, colors, cams, depths, config_);
    write_png(out_, result.albedo, depth);
    if (!normals_.empty()) write_png(normals_, result.normals, BitDepth::k16);
    const Json coverage = to_json(result.coverage);
    write_json(report_.empty() ? sidecar(out_, ".coverage.json") : fs::path(report_), coverage);
    echo_config(sidecar(out_, ".config.json"));
    std::cout << coverage.dump(2) << std::endl;
    return 0;
  }

  std::string mesh_, views_, cameras_, out_, normals_, report_;
  int bits_ = 8;
  BakeConfig config_;
};

// ---------------------------------------------------------------------------

class RoundTripCommand : public Command {
public:
  explicit RoundTripCommand(CLI::App& root)
      : Command(root, "roundtrip", "render six views, bake them back and compare with the texture") {
    param("mesh", mesh_, "input OBJ with UVs");
    param("texture", texture_, "texture PNG (default: built-in checkerboard)");
    param("size", options_.view_size, "rendered view side in pixels");
    param("out", out_, "report JSON (default: stdout only)");
    bake_params(options_.bake);
  }

private:
  int run() override {
    require(mesh_, "--mesh");
    const TriangleMesh mesh = load_mesh(mesh_);
    const ImageGrid texture = texture_.empty() ? default_texture() : read_rgb(texture_);
    const RoundTripReport r = roundtrip(mesh, texture, options_);
    const Json j{{"mean_abs_error", r.mean_abs_error},
                 {"mean_abs_error_255", r.mean_abs_error * 255.0},
                 {"rerender_error", r.rerender_error},
                 {"tolerance", kRoundTripTolerance},
                 {"coverage", to_json(r.coverage)},
                 {"pass", r.passed}};
    std::cout << "mean_abs_error " << r.mean_abs_error << " (" << r.mean_abs_error * 255.0 << "/255) "
              << (r.passed ? "pass" : "fail") << std::endl;
    debug(j.dump());
    if (!out_.empty()) {
      write_json(out_, j);
      echo_config(sidecar(out_, ".config.json"));
    }
    if (!r.passed) throw Error(cli_errc::kCheckFailed, "round trip error exceeds 2/255");
    return 0;
  }

  std::string mesh_, texture_, out_;
  RoundTripOptions options_;
};

std::string parse_error_code(const CLI::ParseError& e) {
  if (dynamic_cast<const CLI::ExtrasError*>(&e)) return cli_errc::kUnknownFlag;
  if (dynamic_cast<const CLI::RequiredError*>(&e)) return cli_errc::kMissingFlag;
  return cli_errc::kParseError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic core of the Jigsaw3D texture pipeline"};
  app.require_subcommand(1);
  std::vector<std::unique_ptr<Command>> commands;
  commands.push_back(std::make_unique<JigsawCommand>(app));
  commands.push_back(std::make_unique<RenderCommand>(app));
  commands.push_back(std::make_unique<PairsCommand>(app));
  commands.push_back(std::make_unique<MetricsCommand>(app));
  commands.push_back(std::make_unique<AttnCheckCommand>(app));
  commands.push_back(std::make_unique<BakeCommand>(app));
  commands.push_back(std::make_unique<RoundTripCommand>(app));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error(parse_error_code(e), e.what());
    return 1;
  }

  for (const auto& cmd : commands) {
    if (!cmd->app()->parsed()) continue;
    try {
      return cmd->execute();
    } catch (const Error& e) {
      print_error(e.code(), e.what());
      return 1;
    } catch (const std::exception& e) {
      print_error(cli_errc::kInternal, e.what());
      return 2;
    }
  }
  return 2;
}
