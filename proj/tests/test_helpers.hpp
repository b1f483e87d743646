#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "jigsaw3d/image.hpp"
#include "jigsaw3d/rng.hpp"

namespace jigsaw3d::testing {

inline ImageGrid random_image(int channels, int height, int width, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  ImageGrid img(channels, height, width);
  for (float& v : img.data()) v = static_cast<float>(rng.uniform());
  return img;
}

inline std::vector<float> sorted_plane(const ImageGrid& img, int c) {
  std::vector<float> v(img.plane(c).begin(), img.plane(c).end());
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace jigsaw3d::testing
