#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace jigsaw3d {

/// Library error carrying a module-qualified code such as
/// "jigsaw.NonDivisibleDimensions". User-facing failures (bad input,
/// bad arguments) are all reported through this type; anything else that
/// escapes is treated as an internal error by the CLI.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

namespace errc {
inline constexpr const char* kNonDivisibleDimensions = "jigsaw.NonDivisibleDimensions";
inline constexpr const char* kDimensionMismatch = "jigsaw.DimensionMismatch";
inline constexpr const char* kInvalidConfig = "jigsaw.InvalidConfig";

inline constexpr const char* kChannelMismatch = "style_metrics.ChannelMismatch";
inline constexpr const char* kEmptyFeature = "style_metrics.EmptyFeature";
inline constexpr const char* kEmptyViewList = "style_metrics.EmptyViewList";

inline constexpr const char* kParseError = "mesh_render.ParseError";
inline constexpr const char* kEmptyMesh = "mesh_render.EmptyMesh";
inline constexpr const char* kMissingUVs = "mesh_render.MissingUVs";
inline constexpr const char* kInvalidCamera = "mesh_render.InvalidCamera";

inline constexpr const char* kIoError = "dataset.IoError";
inline constexpr const char* kMissingFile = "dataset.MissingFile";
inline constexpr const char* kVersionMismatch = "dataset.VersionMismatch";
inline constexpr const char* kCorruptManifest = "dataset.CorruptManifest";

inline constexpr const char* kNonFiniteInput = "attention.NonFiniteInput";
inline constexpr const char* kAttnDimensionMismatch = "attention.DimensionMismatch";
inline constexpr const char* kEmptyReference = "attention.EmptyReference";
inline constexpr const char* kInvalidStep = "attention.InvalidStep";

inline constexpr const char* kCountMismatch = "style_bake.CountMismatch";
inline constexpr const char* kNoValidTexels = "style_bake.NoValidTexels";
inline constexpr const char* kBakeInvalidConfig = "style_bake.InvalidConfig";

inline constexpr const char* kImageIo = "image.IoError";
}  // namespace errc

}  // namespace jigsaw3d
