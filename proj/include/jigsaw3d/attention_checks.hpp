#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "jigsaw3d/attention.hpp"
#include "jigsaw3d/rng.hpp"

namespace jigsaw3d {

inline constexpr double kRowSumTolerance = 1e-12;
inline constexpr double kHullTolerance = 1e-9;
inline constexpr double kGradTolerance = 1e-4;
inline constexpr double kGradStep = 1e-5;

struct AttentionCheckOptions {
  int trials = 20;
  int grad_probes = 100;
};

/// Measured worst cases of the attention invariants over random inputs.
struct AttentionCheckReport {
  std::uint64_t seed = 0;
  int trials = 0;
  int grad_probes = 0;
  double max_row_sum_error = 0.0;
  double min_weight = 1.0;
  double max_hull_violation = 0.0;
  std::size_t permutation_mismatches = 0;
  std::size_t collapse_mismatches = 0;
  double max_grad_relative_error = 0.0;

  bool row_stochastic_ok() const { return max_row_sum_error <= kRowSumTolerance && min_weight >= 0.0; }
  bool hull_ok() const { return max_hull_violation <= kHullTolerance; }
  bool permutation_ok() const { return permutation_mismatches == 0; }
  bool collapse_ok() const { return collapse_mismatches == 0; }
  bool gradient_ok() const { return max_grad_relative_error < kGradTolerance; }
  bool passed() const { return row_stochastic_ok() && hull_ok() && permutation_ok() && collapse_ok() && gradient_ok(); }
};

namespace detail {

inline TokenMatrix random_tokens(Xoshiro256& rng, int n, int d, double scale) {
  TokenMatrix t(n, d);
  for (double& v : t.data) v = rng.uniform(-scale, scale);
  return t;
}

}  // namespace detail

inline AttentionCheckReport run_attention_checks(std::uint64_t seed, const AttentionCheckOptions& options = {}) {
  AttentionCheckReport r;
  r.seed = seed;
  r.trials = options.trials;
  r.grad_probes = options.grad_probes;
  Xoshiro256 rng(seed);
  for (int t = 0; t < options.trials; ++t) {
    const int n = 1 + static_cast<int>(rng.below(24));
    const int m = 1 + static_cast<int>(rng.below(40));
    const int d = 1 + static_cast<int>(rng.below(16));
    // Larger scales push the softmax towards one-hot rows.
    const double scale = t % 4 == 3 ? 8.0 : 1.0;
    const TokenMatrix f_in = detail::random_tokens(rng, n, d, scale);
    const TokenMatrix f_ref = detail::random_tokens(rng, m, d, scale);

    const TokenMatrix a = attention_weights(f_in, f_ref);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (double w : a.row(i)) {
        s += w;
        r.min_weight = std::min(r.min_weight, w);
      }
      r.max_row_sum_error = std::max(r.max_row_sum_error, std::abs(s - 1.0));
    }

    const TokenMatrix out = ref_attention(f_in, f_ref);
    for (int k = 0; k < d; ++k) {
      double lo = f_ref(0, k), hi = f_ref(0, k);
      for (int j = 1; j < m; ++j) {
        lo = std::min(lo, f_ref(j, k));
        hi = std::max(hi, f_ref(j, k));
      }
      for (int i = 0; i < n; ++i)
        r.max_hull_violation = std::max({r.max_hull_violation, lo - out(i, k), out(i, k) - hi});
    }

    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    for (int j = m - 1; j > 0; --j) std::swap(perm[j], perm[rng.below(static_cast<std::uint64_t>(j) + 1)]);
    TokenMatrix permuted(m, d);
    for (int j = 0; j < m; ++j) std::copy(f_ref.row(perm[j]).begin(), f_ref.row(perm[j]).end(), permuted.row(j).begin());
    const TokenMatrix out_p = ref_attention(f_in, permuted);
    for (std::size_t i = 0; i < out.data.size(); ++i) r.permutation_mismatches += out.data[i] != out_p.data[i];

    TokenMatrix single(1, d);
    std::copy(f_ref.row(0).begin(), f_ref.row(0).end(), single.row(0).begin());
    const TokenMatrix collapsed = ref_attention(f_in, single);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < d; ++k) r.collapse_mismatches += collapsed(i, k) != single(0, k);
  }

  for (int p = 0; p < options.grad_probes; ++p) {
    const AttentionOp op = static_cast<AttentionOp>(p % 3);
    const int n = 1 + static_cast<int>(rng.below(8));
    const int m = 1 + static_cast<int>(rng.below(12));
    const int d = 1 + static_cast<int>(rng.below(8));
    const TokenMatrix f_in = detail::random_tokens(rng, n, op == AttentionOp::kSoftmaxRows ? m : d, 1.0);
    const TokenMatrix f_ref = detail::random_tokens(rng, m, d, 1.0);
    const TokenMatrix d_in = detail::random_tokens(rng, f_in.rows, f_in.cols, 1.0);
    const TokenMatrix d_ref = detail::random_tokens(rng, m, d, 1.0);
    const GradCheckResult g = finite_difference_grad_check(op, f_in, f_ref, d_in, d_ref, kGradStep);
    r.max_grad_relative_error = std::max(r.max_grad_relative_error, g.relative_error);
  }
  return r;
}

}  // namespace jigsaw3d
