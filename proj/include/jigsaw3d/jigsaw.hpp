#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jigsaw3d/error.hpp"
#include "jigsaw3d/image.hpp"
#include "jigsaw3d/reduce.hpp"
#include "jigsaw3d/rng.hpp"

namespace jigsaw3d {

inline constexpr int kTrainPatchSize = 64;
inline constexpr int kInferPatchSize = 128;
inline constexpr double kMaxTrainMaskRatio = 0.25;
inline constexpr float kDefaultBackground = 0.5f;

enum class JigsawMode { kTrain, kInfer };

inline const char* to_string(JigsawMode m) { return m == JigsawMode::kTrain ? "train" : "infer"; }

struct JigsawConfig {
  int patch_size = kTrainPatchSize;
  double mask_ratio = 0.0;
  /// Per-channel fill for masked cells; a single entry is broadcast to all
  /// channels.
  std::vector<float> background{kDefaultBackground};
  std::uint64_t seed = 0;

  void validate() const {
    if (patch_size < 1) throw Error(errc::kInvalidConfig, "patch_size must be >= 1");
    if (!(mask_ratio >= 0.0 && mask_ratio <= 1.0))
      throw Error(errc::kInvalidConfig, "mask_ratio must lie in [0, 1]");
    if (background.empty()) throw Error(errc::kInvalidConfig, "background must have at least one value");
    for (float b : background)
      if (!(b >= 0.0f && b <= 1.0f)) throw Error(errc::kInvalidConfig, "background values must lie in [0, 1]");
  }

  friend bool operator==(const JigsawConfig&, const JigsawConfig&) = default;
};

struct PatchGrid {
  int rows = 0;
  int cols = 0;
  int cells() const noexcept { return rows * cols; }
  friend bool operator==(const PatchGrid&, const PatchGrid&) = default;
};

/// mapping[dst] is the source cell (row-major index) whose patch ends up in
/// destination cell dst.
struct PatchPermutation {
  int rows = 0;
  int cols = 0;
  std::vector<int> mapping;

  PatchGrid grid() const noexcept { return {rows, cols}; }

  bool is_bijection() const {
    if (static_cast<int>(mapping.size()) != rows * cols) return false;
    std::vector<char> seen(mapping.size(), 0);
    for (int s : mapping) {
      if (s < 0 || s >= static_cast<int>(mapping.size()) || seen[s]) return false;
      seen[s] = 1;
    }
    return true;
  }

  PatchPermutation inverse() const {
    PatchPermutation inv{rows, cols, std::vector<int>(mapping.size())};
    for (std::size_t d = 0; d < mapping.size(); ++d) inv.mapping[mapping[d]] = static_cast<int>(d);
    return inv;
  }

  static PatchPermutation identity(int rows, int cols) {
    PatchPermutation p{rows, cols, std::vector<int>(static_cast<std::size_t>(rows) * cols)};
    std::iota(p.mapping.begin(), p.mapping.end(), 0);
    return p;
  }

  friend bool operator==(const PatchPermutation&, const PatchPermutation&) = default;
};

struct MaskPattern {
  int rows = 0;
  int cols = 0;
  std::vector<bool> visible;

  PatchGrid grid() const noexcept { return {rows, cols}; }
  int masked_count() const {
    return static_cast<int>(std::count(visible.begin(), visible.end(), false));
  }

  static MaskPattern all_visible(int rows, int cols) {
    return {rows, cols, std::vector<bool>(static_cast<std::size_t>(rows) * cols, true)};
  }

  friend bool operator==(const MaskPattern&, const MaskPattern&) = default;
};

struct JigsawOutput {
  ImageGrid image;
  PatchPermutation permutation;
  MaskPattern mask;
  JigsawConfig config;
};

/// Random streams under a jigsaw seed.
enum class JigsawStream : std::uint64_t { kPermutation = 0, kMask = 1 };

inline PatchGrid partition(const ImageGrid& image, int patch_size) {
  if (patch_size < 1) throw Error(errc::kInvalidConfig, "patch_size must be >= 1");
  if (image.height() % patch_size != 0 || image.width() % patch_size != 0) {
    throw Error(errc::kNonDivisibleDimensions,
                "image " + std::to_string(image.width()) + "x" + std::to_string(image.height()) +
                    " is not divisible by patch size " + std::to_string(patch_size) +
                    "; center-crop or resize first");
  }
  return {image.height() / patch_size, image.width() / patch_size};
}

/// Fisher-Yates over the seeded xoshiro stream.
inline PatchPermutation make_permutation(int rows, int cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw Error(errc::kInvalidConfig, "permutation grid must be at least 1x1");
  PatchPermutation perm = PatchPermutation::identity(rows, cols);
  Xoshiro256 rng(seed);
  for (std::size_t i = perm.mapping.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(perm.mapping[i - 1], perm.mapping[j]);
  }
  return perm;
}

/// One Bernoulli(1 - p) draw per cell, in row-major order.
inline MaskPattern make_mask(int rows, int cols, double mask_ratio, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw Error(errc::kInvalidConfig, "mask grid must be at least 1x1");
  if (!(mask_ratio >= 0.0 && mask_ratio <= 1.0)) throw Error(errc::kInvalidConfig, "mask_ratio must lie in [0, 1]");
  MaskPattern mask = MaskPattern::all_visible(rows, cols);
  Xoshiro256 rng(seed);
  for (std::size_t i = 0; i < mask.visible.size(); ++i) mask.visible[i] = !rng.bernoulli(mask_ratio);
  return mask;
}

namespace detail {

inline void require_grid(const ImageGrid& image, int patch_size, PatchGrid expected, const char* what) {
  const PatchGrid grid = partition(image, patch_size);
  if (grid != expected) {
    throw Error(errc::kDimensionMismatch,
                std::string(what) + " grid " + std::to_string(expected.rows) + "x" +
                    std::to_string(expected.cols) + " does not match image partition " +
                    std::to_string(grid.rows) + "x" + std::to_string(grid.cols));
  }
}

// Copies patch `src_cell` of `in` into patch `dst_cell` of `out`.
inline void copy_patch(const ImageGrid& in, ImageGrid& out, int patch_size, int cols, int src_cell,
                       int dst_cell) {
  const int sy = (src_cell / cols) * patch_size, sx = (src_cell % cols) * patch_size;
  const int dy = (dst_cell / cols) * patch_size, dx = (dst_cell % cols) * patch_size;
  for (int c = 0; c < in.channels(); ++c) {
    for (int r = 0; r < patch_size; ++r) {
      const float* src = in.plane(c).data() + static_cast<std::size_t>(sy + r) * in.width() + sx;
      std::copy(src, src + patch_size, &out.at(c, dy + r, dx));
    }
  }
}

}  // namespace detail

inline ImageGrid shuffle(const ImageGrid& image, const PatchPermutation& perm, int patch_size) {
  detail::require_grid(image, patch_size, perm.grid(), "permutation");
  if (!perm.is_bijection()) throw Error(errc::kDimensionMismatch, "permutation is not a bijection");
  ImageGrid out(image.channels(), image.height(), image.width());
  for (int dst = 0; dst < perm.rows * perm.cols; ++dst)
    detail::copy_patch(image, out, patch_size, perm.cols, perm.mapping[dst], dst);
  return out;
}

inline ImageGrid unshuffle(const ImageGrid& image, const PatchPermutation& perm, int patch_size) {
  detail::require_grid(image, patch_size, perm.grid(), "permutation");
  if (!perm.is_bijection()) throw Error(errc::kDimensionMismatch, "permutation is not a bijection");
  ImageGrid out(image.channels(), image.height(), image.width());
  for (int dst = 0; dst < perm.rows * perm.cols; ++dst)
    detail::copy_patch(image, out, patch_size, perm.cols, dst, perm.mapping[dst]);
  return out;
}

inline ImageGrid apply_mask(const ImageGrid& image, const MaskPattern& mask, const std::vector<float>& background,
                            int patch_size) {
  detail::require_grid(image, patch_size, mask.grid(), "mask");
  if (background.size() != 1 && static_cast<int>(background.size()) != image.channels()) {
    throw Error(errc::kDimensionMismatch, "background must have 1 or C values");
  }
  ImageGrid out = image;
  for (int cell = 0; cell < mask.rows * mask.cols; ++cell) {
    if (mask.visible[cell]) continue;
    const int y0 = (cell / mask.cols) * patch_size, x0 = (cell % mask.cols) * patch_size;
    for (int c = 0; c < image.channels(); ++c) {
      const float mu = background.size() == 1 ? background[0] : background[c];
      for (int y = y0; y < y0 + patch_size; ++y) std::fill_n(&out.at(c, y, x0), patch_size, mu);
    }
  }
  return out;
}

/// Shuffle, then mask the shuffled cells. Infer mode shuffles only: the mask
/// ratio in `config` is ignored and the returned mask is all-visible.
inline JigsawOutput jigsaw(const ImageGrid& image, const JigsawConfig& config, JigsawMode mode) {
  config.validate();
  const PatchGrid grid = partition(image, config.patch_size);
  JigsawOutput out;
  out.config = config;
  if (mode == JigsawMode::kInfer) out.config.mask_ratio = 0.0;
  out.permutation = make_permutation(grid.rows, grid.cols,
                                     derive_seed(config.seed, static_cast<std::uint64_t>(JigsawStream::kPermutation)));
  out.image = shuffle(image, out.permutation, config.patch_size);
  if (mode == JigsawMode::kTrain && out.config.mask_ratio > 0.0) {
    out.mask = make_mask(grid.rows, grid.cols, out.config.mask_ratio,
                         derive_seed(config.seed, static_cast<std::uint64_t>(JigsawStream::kMask)));
    out.image = apply_mask(out.image, out.mask, config.background, config.patch_size);
  } else {
    out.mask = MaskPattern::all_visible(grid.rows, grid.cols);
  }
  return out;
}

/// Per-channel mean and population variance.
struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> variance;
};

enum class SummationOrder {
  /// Pairwise reduction in row-major pixel order.
  kRowMajor,
  /// Pairwise reduction over the sorted value multiset, so any relocation of
  /// pixels yields bit-identical statistics.
  kSortedMultiset,
};

namespace detail {

/// Ascending LSD radix sort on the IEEE bit patterns; same order as
/// std::sort for non-NaN values, in linear time.
inline void radix_sort(std::vector<float>& values) {
  const std::size_t n = values.size();
  std::vector<std::uint32_t> keys(n), tmp(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(values[i]);
    keys[i] = (bits & 0x80000000u) ? ~bits : bits | 0x80000000u;
  }
  constexpr int kBits = 11;
  constexpr std::uint32_t kMask = (1u << kBits) - 1;
  std::vector<std::size_t> count(std::size_t{1} << kBits);
  for (int shift = 0; shift < 32; shift += kBits) {
    std::fill(count.begin(), count.end(), 0);
    for (std::uint32_t k : keys) ++count[(k >> shift) & kMask];
    std::size_t total = 0;
    for (std::size_t& c : count) total += std::exchange(c, total);
    for (std::uint32_t k : keys) tmp[count[(k >> shift) & kMask]++] = k;
    keys.swap(tmp);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t k = keys[i];
    values[i] = std::bit_cast<float>((k & 0x80000000u) ? k & 0x7FFFFFFFu : ~k);
  }
}

}  // namespace detail

inline ChannelStats channel_stats(const ImageGrid& image, SummationOrder order = SummationOrder::kRowMajor) {
  ChannelStats stats;
  std::vector<float> sorted;
  for (int c = 0; c < image.channels(); ++c) {
    std::span<const float> values = image.plane(c);
    if (order == SummationOrder::kSortedMultiset) {
      sorted.assign(values.begin(), values.end());
      detail::radix_sort(sorted);
      values = sorted;
    }
    const double n = static_cast<double>(values.size());
    const double mean = pairwise_sum(values) / n;
    const double var = pairwise_sum(0, values.size(), [&](std::size_t i) {
                         const double d = values[i] - mean;
                         return d * d;
                       }) / n;
    stats.mean.push_back(mean);
    stats.variance.push_back(var);
  }
  return stats;
}

}  // namespace jigsaw3d
