#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "jigsaw3d/error.hpp"
#include "jigsaw3d/image.hpp"
#include "jigsaw3d/reduce.hpp"
#include "jigsaw3d/rng.hpp"

namespace jigsaw3d {

inline constexpr int kFeatureLevels = 5;
inline constexpr std::uint64_t kDefaultBankSeed = 19;

/// C x H x W feature map in double precision, channel-major like ImageGrid.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w) : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w) {}

  std::size_t plane_size() const noexcept { return static_cast<std::size_t>(height) * width; }
  std::span<const double> plane(int c) const noexcept { return {data.data() + c * plane_size(), plane_size()}; }
  std::span<double> plane(int c) noexcept { return {data.data() + c * plane_size(), plane_size()}; }

  static FeatureMap from_image(const ImageGrid& img) {
    FeatureMap f(img.channels(), img.height(), img.width());
    for (std::size_t i = 0; i < img.size(); ++i) f.data[i] = img.data()[i];
    return f;
  }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;
};

/// Symmetric C x C matrix, row-major.
struct GramMatrix {
  int size = 0;
  std::vector<double> values;
  double operator()(int i, int j) const noexcept { return values[static_cast<std::size_t>(i) * size + j]; }
};

/// Five-stage feature extractor standing in for a pretrained CNN. Stage 0 is
/// the identity on pixels; stages 1-4 apply a seeded 3x3 convolution
/// (clamp-to-edge padding, no bias), 2x2 average pooling and ReLU.
class FeatureBank {
public:
  static constexpr std::array<int, kFeatureLevels - 1> kWidths{16, 32, 64, 128};

  explicit FeatureBank(std::uint64_t seed = kDefaultBankSeed) : seed_(seed) {
    int in = 3;
    for (std::size_t s = 0; s < kWidths.size(); ++s) {
      Stage stage{in, kWidths[s], {}};
      stage.weights.resize(static_cast<std::size_t>(stage.out) * stage.in * 9);
      Xoshiro256 rng(derive_seed(seed, s));
      const double stddev = std::sqrt(2.0 / (9.0 * in));
      for (double& w : stage.weights) w = rng.normal() * stddev;
      stages_.push_back(std::move(stage));
      in = kWidths[s];
    }
  }

  std::uint64_t seed() const noexcept { return seed_; }

  std::vector<FeatureMap> extract(const ImageGrid& image) const {
    if (image.channels() != 3) {
      throw Error(errc::kChannelMismatch,
                  "feature extraction needs 3 channels, got " + std::to_string(image.channels()));
    }
    std::vector<FeatureMap> levels;
    levels.reserve(kFeatureLevels);
    levels.push_back(FeatureMap::from_image(image));
    for (const Stage& stage : stages_) levels.push_back(run_stage(stage, levels.back()));
    return levels;
  }

private:
  struct Stage {
    int in;
    int out;
    std::vector<double> weights;  // [out][in][3][3]
  };

  static FeatureMap run_stage(const Stage& stage, const FeatureMap& input) {
    const int h = input.height, w = input.width;
    const int pw = w + 2;
    // Clamp-padded copy so the inner loop is branch free.
    std::vector<double> padded(static_cast<std::size_t>(stage.in) * (h + 2) * pw);
    for (int c = 0; c < stage.in; ++c)
      for (int y = -1; y <= h; ++y)
        for (int x = -1; x <= w; ++x) {
          const int sy = std::clamp(y, 0, h - 1), sx = std::clamp(x, 0, w - 1);
          padded[(static_cast<std::size_t>(c) * (h + 2) + y + 1) * pw + x + 1] =
              input.data[(static_cast<std::size_t>(c) * h + sy) * w + sx];
        }

    const int oh = std::max(1, h / 2), ow = std::max(1, w / 2);
    FeatureMap out(stage.out, oh, ow);
    std::vector<double> conv(static_cast<std::size_t>(h) * w);
    for (int co = 0; co < stage.out; ++co) {
      std::fill(conv.begin(), conv.end(), 0.0);
      for (int ci = 0; ci < stage.in; ++ci) {
        const double* base = padded.data() + static_cast<std::size_t>(ci) * (h + 2) * pw;
        for (int ky = 0; ky < 3; ++ky)
          for (int kx = 0; kx < 3; ++kx) {
            const double wt = stage.weights[((static_cast<std::size_t>(co) * stage.in + ci) * 3 + ky) * 3 + kx];
            for (int y = 0; y < h; ++y) {
              const double* src = base + static_cast<std::size_t>(y + ky) * pw + kx;
              double* dst = conv.data() + static_cast<std::size_t>(y) * w;
              for (int x = 0; x < w; ++x) dst[x] += wt * src[x];
            }
          }
      }
      auto plane = out.plane(co);
      for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
          const int y0 = std::min(2 * y, h - 1), y1 = std::min(2 * y + 1, h - 1);
          const int x0 = std::min(2 * x, w - 1), x1 = std::min(2 * x + 1, w - 1);
          const double avg = 0.25 * ((conv[y0 * w + x0] + conv[y0 * w + x1]) + (conv[y1 * w + x0] + conv[y1 * w + x1]));
          plane[static_cast<std::size_t>(y) * ow + x] = avg > 0.0 ? avg : 0.0;
        }
    }
    return out;
  }

  std::uint64_t seed_;
  std::vector<Stage> stages_;
};

inline std::vector<FeatureMap> extract_features(const ImageGrid& image, const FeatureBank& bank) {
  return bank.extract(image);
}

/// G = F F^T / (C H W), each entry a pairwise sum over pixels.
inline GramMatrix gram(const FeatureMap& f) {
  if (f.plane_size() == 0 || f.channels == 0) throw Error(errc::kEmptyFeature, "gram of an empty feature map");
  GramMatrix g{f.channels, std::vector<double>(static_cast<std::size_t>(f.channels) * f.channels)};
  const double norm = static_cast<double>(f.channels) * static_cast<double>(f.plane_size());
  for (int i = 0; i < f.channels; ++i) {
    const auto a = f.plane(i);
    for (int j = i; j < f.channels; ++j) {
      const auto b = f.plane(j);
      const double v = pairwise_sum(0, a.size(), [&](std::size_t k) { return a[k] * b[k]; }) / norm;
      g.values[static_cast<std::size_t>(i) * f.channels + j] = v;
      g.values[static_cast<std::size_t>(j) * f.channels + i] = v;
    }
  }
  return g;
}

namespace detail {
inline void require_same_channels(const FeatureMap& a, const FeatureMap& b) {
  if (a.channels != b.channels) {
    throw Error(errc::kChannelMismatch, "channel counts differ: " + std::to_string(a.channels) + " vs " +
                                            std::to_string(b.channels));
  }
}

inline double l2_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(pairwise_sum(0, a.size(), [&](std::size_t i) {
    const double d = a[i] - b[i];
    return d * d;
  }));
}
}  // namespace detail

/// Distance between precomputed Gram matrices, for scoring many images
/// against one reference.
inline double gram_distance(const GramMatrix& a, const GramMatrix& b) {
  if (a.size != b.size)
    throw Error(errc::kChannelMismatch, "channel counts differ: " + std::to_string(a.size) + " vs " + std::to_string(b.size));
  return detail::l2_distance(a.values, b.values);
}

inline double gram_distance(const FeatureMap& ref, const FeatureMap& gen) {
  detail::require_same_channels(ref, gen);
  return gram_distance(gram(ref), gram(gen));
}

/// Per-channel mean and population standard deviation.
struct FeatureMoments {
  std::vector<double> mean;
  std::vector<double> stddev;
};

inline FeatureMoments feature_moments(const FeatureMap& f) {
  if (f.plane_size() == 0) throw Error(errc::kEmptyFeature, "moments of an empty feature map");
  FeatureMoments m;
  const double n = static_cast<double>(f.plane_size());
  for (int c = 0; c < f.channels; ++c) {
    const auto p = f.plane(c);
    const double mu = pairwise_sum(p) / n;
    const double var = pairwise_sum(0, p.size(), [&](std::size_t i) {
                         const double d = p[i] - mu;
                         return d * d;
                       }) / n;
    m.mean.push_back(mu);
    m.stddev.push_back(std::sqrt(var));
  }
  return m;
}

inline double adain_distance(const FeatureMoments& a, const FeatureMoments& b) {
  if (a.mean.size() != b.mean.size())
    throw Error(errc::kChannelMismatch, "channel counts differ: " + std::to_string(a.mean.size()) + " vs " +
                                            std::to_string(b.mean.size()));
  return detail::l2_distance(a.mean, b.mean) + detail::l2_distance(a.stddev, b.stddev);
}

inline double adain_distance(const FeatureMap& ref, const FeatureMap& gen) {
  detail::require_same_channels(ref, gen);
  return adain_distance(feature_moments(ref), feature_moments(gen));
}

struct StyleDistanceReport {
  std::array<double, kFeatureLevels> gram{};
  std::array<double, kFeatureLevels> adain{};
  double mean_gram = 0.0;
  double mean_adain = 0.0;
  std::uint64_t bank_seed = 0;

  void update_means() {
    mean_gram = 0.0;
    mean_adain = 0.0;
    for (int l = 0; l < kFeatureLevels; ++l) {
      mean_gram += gram[l];
      mean_adain += adain[l];
    }
    mean_gram /= kFeatureLevels;
    mean_adain /= kFeatureLevels;
  }
};

inline StyleDistanceReport style_distance(const std::vector<FeatureMap>& a, const std::vector<FeatureMap>& b,
                                          std::uint64_t bank_seed) {
  if (a.size() != kFeatureLevels || b.size() != kFeatureLevels)
    throw Error(errc::kChannelMismatch, "feature pyramids must have 5 levels");
  StyleDistanceReport r;
  r.bank_seed = bank_seed;
  for (int l = 0; l < kFeatureLevels; ++l) {
    r.gram[l] = gram_distance(a[l], b[l]);
    r.adain[l] = adain_distance(a[l], b[l]);
  }
  r.update_means();
  return r;
}

inline StyleDistanceReport style_distance(const ImageGrid& a, const ImageGrid& b, const FeatureBank& bank) {
  return style_distance(bank.extract(a), bank.extract(b), bank.seed());
}

struct MultiViewStyleReport {
  std::vector<StyleDistanceReport> per_view;
  StyleDistanceReport mean;
};

/// Scores every view against the reference and averages the per-view
/// reports elementwise.
inline MultiViewStyleReport multi_view_style_score(std::span<const ImageGrid> views, const ImageGrid& reference,
                                                   const FeatureBank& bank) {
  if (views.empty()) throw Error(errc::kEmptyViewList, "at least one view is required");
  const auto ref_features = bank.extract(reference);
  MultiViewStyleReport out;
  for (const ImageGrid& view : views) out.per_view.push_back(style_distance(ref_features, bank.extract(view), bank.seed()));
  out.mean.bank_seed = bank.seed();
  const double n = static_cast<double>(views.size());
  for (int l = 0; l < kFeatureLevels; ++l) {
    double g = 0.0, a = 0.0;
    for (const auto& r : out.per_view) {
      g += r.gram[l];
      a += r.adain[l];
    }
    out.mean.gram[l] = g / n;
    out.mean.adain[l] = a / n;
  }
  out.mean.update_means();
  return out;
}

}  // namespace jigsaw3d
