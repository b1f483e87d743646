#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "jigsaw3d/error.hpp"
#include "jigsaw3d/parallel.hpp"

namespace jigsaw3d {

/// n x d row-major matrix of feature tokens.
struct TokenMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  TokenMatrix() = default;
  TokenMatrix(int n, int d, double fill = 0.0) : rows(n), cols(d), data(static_cast<std::size_t>(n) * d, fill) {}
  TokenMatrix(int n, int d, std::vector<double> values) : rows(n), cols(d), data(std::move(values)) {
    if (data.size() != static_cast<std::size_t>(n) * d)
      throw Error(errc::kAttnDimensionMismatch, "token data size does not match rows * cols");
  }

  double& operator()(int i, int j) noexcept { return data[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const noexcept { return data[static_cast<std::size_t>(i) * cols + j]; }
  std::span<const double> row(int i) const noexcept { return {data.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)}; }
  std::span<double> row(int i) noexcept { return {data.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)}; }

  friend bool operator==(const TokenMatrix&, const TokenMatrix&) = default;
};

/// Multi-view hidden states indexed (view, y, x, channel).
struct MultiViewFeature {
  int views = 0;
  int height = 0;
  int width = 0;
  int dim = 0;
  std::vector<double> data;

  MultiViewFeature() = default;
  MultiViewFeature(int v, int h, int w, int d)
      : views(v), height(h), width(w), dim(d), data(static_cast<std::size_t>(v) * h * w * d, 0.0) {}

  std::size_t offset(int v, int y, int x) const noexcept {
    return ((static_cast<std::size_t>(v) * height + y) * width + x) * dim;
  }

  /// Tokens of one view, flattened row-major (y, then x).
  TokenMatrix view_tokens(int v) const {
    TokenMatrix t(height * width, dim);
    std::copy_n(data.begin() + offset(v, 0, 0), t.data.size(), t.data.begin());
    return t;
  }

  /// All tokens, view-major then row-major.
  TokenMatrix all_tokens() const { return TokenMatrix(views * height * width, dim, data); }

  friend bool operator==(const MultiViewFeature&, const MultiViewFeature&) = default;
};

namespace detail {
/// Sum that depends only on the multiset of terms, not their order.
inline double canonical_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

inline void require_finite(const TokenMatrix& m, const char* what) {
  for (double v : m.data)
    if (!std::isfinite(v)) throw Error(errc::kNonFiniteInput, std::string(what) + " contains a non-finite value");
}
}  // namespace detail

/// Row-wise softmax with the row maximum subtracted first.
inline TokenMatrix softmax_rows(const TokenMatrix& logits) {
  detail::require_finite(logits, "logits");
  TokenMatrix out(logits.rows, logits.cols);
  for (int i = 0; i < logits.rows; ++i) {
    const auto in = logits.row(i);
    auto dst = out.row(i);
    const double peak = *std::max_element(in.begin(), in.end());
    for (int j = 0; j < logits.cols; ++j) dst[j] = std::exp(in[j] - peak);
    std::vector<double> terms(dst.begin(), dst.end());
    const double total = detail::canonical_sum(terms);
    for (double& v : dst) v /= total;
  }
  return out;
}

/// softmax(q k^T / sqrt(d)) as an n x m matrix.
inline TokenMatrix attention_weights(const TokenMatrix& query, const TokenMatrix& keys) {
  if (query.cols != keys.cols)
    throw Error(errc::kAttnDimensionMismatch,
                "feature widths differ: " + std::to_string(query.cols) + " vs " + std::to_string(keys.cols));
  if (keys.rows < 1) throw Error(errc::kEmptyReference, "reference must contain at least one token");
  detail::require_finite(query, "query");
  detail::require_finite(keys, "reference");
  const double scale = 1.0 / std::sqrt(static_cast<double>(query.cols));
  TokenMatrix logits(query.rows, keys.rows);
  for (int i = 0; i < query.rows; ++i)
    for (int j = 0; j < keys.rows; ++j) {
      double s = 0.0;
      for (int k = 0; k < query.cols; ++k) s += query(i, k) * keys(j, k);
      logits(i, j) = s * scale;
    }
  return softmax_rows(logits);
}

inline TokenMatrix matmul(const TokenMatrix& a, const TokenMatrix& b) {
  TokenMatrix out(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      for (int j = 0; j < b.cols; ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

/// Reference attention: the reference tokens are both keys and values, no
/// projections. The weighted sum over reference tokens is order-canonical,
/// so permuting the reference rows leaves the output bit-identical.
inline TokenMatrix ref_attention(const TokenMatrix& f_in, const TokenMatrix& f_ref) {
  const TokenMatrix a = attention_weights(f_in, f_ref);
  TokenMatrix out(f_in.rows, f_in.cols);
  std::vector<double> terms(static_cast<std::size_t>(f_ref.rows));
  for (int i = 0; i < f_in.rows; ++i)
    for (int k = 0; k < f_in.cols; ++k) {
      for (int j = 0; j < f_ref.rows; ++j) terms[j] = a(i, j) * f_ref(j, k);
      out(i, k) = detail::canonical_sum(terms);
    }
  return out;
}

inline TokenMatrix self_attention(const TokenMatrix& f) { return ref_attention(f, f); }

/// Tokens sharing an image row attend jointly across every view and column.
inline MultiViewFeature multiview_row_attention(const MultiViewFeature& f) {
  MultiViewFeature out(f.views, f.height, f.width, f.dim);
  parallel_for(static_cast<std::size_t>(f.height), [&](std::size_t yi) {
    const int y = static_cast<int>(yi);
    TokenMatrix stack(f.views * f.width, f.dim);
    for (int v = 0; v < f.views; ++v)
      std::copy_n(f.data.begin() + f.offset(v, y, 0), f.width * f.dim, stack.data.begin() + static_cast<std::size_t>(v) * f.width * f.dim);
    const TokenMatrix res = self_attention(stack);
    for (int v = 0; v < f.views; ++v)
      std::copy_n(res.data.begin() + static_cast<std::size_t>(v) * f.width * f.dim, f.width * f.dim, out.data.begin() + f.offset(v, y, 0));
  });
  return out;
}

/// Per-view self-attention over each view's full token set.
inline MultiViewFeature per_view_self_attention(const MultiViewFeature& f) {
  MultiViewFeature out(f.views, f.height, f.width, f.dim);
  for (int v = 0; v < f.views; ++v) {
    const TokenMatrix res = self_attention(f.view_tokens(v));
    std::copy(res.data.begin(), res.data.end(), out.data.begin() + f.offset(v, 0, 0));
  }
  return out;
}

/// Every token of every view attends to the reference tokens.
inline MultiViewFeature reference_branch(const MultiViewFeature& f, const TokenMatrix& f_ref) {
  MultiViewFeature out(f.views, f.height, f.width, f.dim);
  if (f.views * f.height * f.width == 0) {
    attention_weights(TokenMatrix(0, f.dim), f_ref);  // validates shapes
    return out;
  }
  out.data = ref_attention(f.all_tokens(), f_ref).data;
  return out;
}

/// Residual three-branch block: f_in + self + multi-view row + reference.
inline MultiViewFeature fused_block(const MultiViewFeature& f_in, const TokenMatrix& f_ref) {
  if (f_in.dim != f_ref.cols)
    throw Error(errc::kAttnDimensionMismatch,
                "feature widths differ: " + std::to_string(f_in.dim) + " vs " + std::to_string(f_ref.cols));
  const MultiViewFeature self = per_view_self_attention(f_in);
  const MultiViewFeature rows = multiview_row_attention(f_in);
  const MultiViewFeature ref = reference_branch(f_in, f_ref);
  MultiViewFeature out = f_in;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += self.data[i] + rows.data[i] + ref.data[i];
  return out;
}

/// Directional derivative of softmax_rows at `logits` along `direction`:
/// dA = A * (dS - rowsum(A * dS)).
inline TokenMatrix softmax_rows_jvp(const TokenMatrix& logits, const TokenMatrix& direction) {
  const TokenMatrix a = softmax_rows(logits);
  TokenMatrix out(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i) {
    double inner = 0.0;
    for (int j = 0; j < a.cols; ++j) inner += a(i, j) * direction(i, j);
    for (int j = 0; j < a.cols; ++j) out(i, j) = a(i, j) * (direction(i, j) - inner);
  }
  return out;
}

/// Directional derivative of ref_attention(f_in, f_ref) along
/// (d_in, d_ref). With S = f_in f_ref^T / sqrt(d), A = softmax(S),
/// O = A f_ref:
///   dS = (d_in f_ref^T + f_in d_ref^T) / sqrt(d)
///   dO = softmax'(S)[dS] f_ref + A d_ref
inline TokenMatrix ref_attention_jvp(const TokenMatrix& f_in, const TokenMatrix& f_ref, const TokenMatrix& d_in,
                                     const TokenMatrix& d_ref) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(f_in.cols));
  TokenMatrix logits(f_in.rows, f_ref.rows), d_logits(f_in.rows, f_ref.rows);
  for (int i = 0; i < f_in.rows; ++i)
    for (int j = 0; j < f_ref.rows; ++j) {
      double s = 0.0, ds = 0.0;
      for (int k = 0; k < f_in.cols; ++k) {
        s += f_in(i, k) * f_ref(j, k);
        ds += d_in(i, k) * f_ref(j, k) + f_in(i, k) * d_ref(j, k);
      }
      logits(i, j) = s * scale;
      d_logits(i, j) = ds * scale;
    }
  const TokenMatrix a = softmax_rows(logits);
  const TokenMatrix da = softmax_rows_jvp(logits, d_logits);
  TokenMatrix out = matmul(da, f_ref);
  const TokenMatrix second = matmul(a, d_ref);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += second.data[i];
  return out;
}

enum class AttentionOp { kSoftmaxRows, kRefAttention, kSelfAttention };

struct GradCheckResult {
  double relative_error = 0.0;
  double analytic_norm = 0.0;
  double numeric_norm = 0.0;
};

/// Compares the analytic JVP of `op` with a central difference of step h.
/// For kSoftmaxRows and kSelfAttention only (f_in, d_in) are used.
inline GradCheckResult finite_difference_grad_check(AttentionOp op, const TokenMatrix& f_in, const TokenMatrix& f_ref,
                                                    const TokenMatrix& d_in, const TokenMatrix& d_ref, double h) {
  if (!(h > 0.0 && h <= 1e-2)) throw Error(errc::kInvalidStep, "step h must lie in (0, 1e-2]");
  auto shifted = [](const TokenMatrix& m, const TokenMatrix& d, double s) {
    TokenMatrix out = m;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += s * d.data[i];
    return out;
  };
  auto eval = [&](double s) {
    switch (op) {
      case AttentionOp::kSoftmaxRows: return softmax_rows(shifted(f_in, d_in, s));
      case AttentionOp::kSelfAttention: return self_attention(shifted(f_in, d_in, s));
      case AttentionOp::kRefAttention: break;
    }
    return ref_attention(shifted(f_in, d_in, s), shifted(f_ref, d_ref, s));
  };
  TokenMatrix analytic;
  switch (op) {
    case AttentionOp::kSoftmaxRows: analytic = softmax_rows_jvp(f_in, d_in); break;
    case AttentionOp::kSelfAttention: analytic = ref_attention_jvp(f_in, f_in, d_in, d_in); break;
    case AttentionOp::kRefAttention: analytic = ref_attention_jvp(f_in, f_ref, d_in, d_ref); break;
  }
  const TokenMatrix plus = eval(h), minus = eval(-h);
  double diff2 = 0.0, an2 = 0.0, num2 = 0.0;
  for (std::size_t i = 0; i < analytic.data.size(); ++i) {
    const double numeric = (plus.data[i] - minus.data[i]) / (2.0 * h);
    diff2 += (numeric - analytic.data[i]) * (numeric - analytic.data[i]);
    an2 += analytic.data[i] * analytic.data[i];
    num2 += numeric * numeric;
  }
  GradCheckResult r;
  r.analytic_norm = std::sqrt(an2);
  r.numeric_norm = std::sqrt(num2);
  const double denom = std::max(r.analytic_norm, r.numeric_norm);
  r.relative_error = denom > 0.0 ? std::sqrt(diff2) / denom : 0.0;
  return r;
}

}  // namespace jigsaw3d
