#pragma once

#include <cstddef>
#include <span>

namespace jigsaw3d {

/// Pairwise (tree) summation of term(i) for i in [begin, end). The split
/// points depend only on the range, so the rounding pattern is a fixed
/// function of the input order.
template <class Term>
double pairwise_sum(std::size_t begin, std::size_t end, const Term& term) {
  constexpr std::size_t kLeaf = 64;
  const std::size_t n = end - begin;
  if (n <= kLeaf) {
    // Four interleaved partial sums keep the adder pipeline busy; the
    // grouping is still a fixed function of the range.
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = begin;
    for (; i + 4 <= end; i += 4) {
      s0 += term(i);
      s1 += term(i + 1);
      s2 += term(i + 2);
      s3 += term(i + 3);
    }
    for (; i < end; ++i) s0 += term(i);
    return (s0 + s1) + (s2 + s3);
  }
  const std::size_t mid = begin + n / 2;
  return pairwise_sum(begin, mid, term) + pairwise_sum(mid, end, term);
}

template <class T>
double pairwise_sum(std::span<const T> values) {
  return pairwise_sum(0, values.size(), [&](std::size_t i) { return static_cast<double>(values[i]); });
}

}  // namespace jigsaw3d
