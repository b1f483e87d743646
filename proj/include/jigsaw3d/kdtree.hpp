#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "jigsaw3d/vec.hpp"

namespace jigsaw3d {

struct Neighbor {
  double distance = 0.0;
  int id = 0;

  friend bool operator<(const Neighbor& a, const Neighbor& b) noexcept {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  }
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Static kd-tree for k-nearest-neighbour queries on an immutable point
/// set. Results match a brute-force scan exactly, including tie order.
/// Queries are read-only and thread-safe.
class KdTree {
public:
  KdTree(std::span<const Vec3> points, std::span<const int> ids) : points_(points.begin(), points.end()), ids_(ids.begin(), ids.end()) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0);
    if (!order_.empty()) build(0, order_.size());
  }

  std::size_t size() const noexcept { return points_.size(); }

  /// The k nearest points by Euclidean distance, ties broken by lower id,
  /// sorted ascending.
  std::vector<Neighbor> nearest(Vec3 q, int k) const {
    std::vector<Neighbor> best;
    if (points_.empty() || k < 1) return best;
    best.reserve(static_cast<std::size_t>(k) + 1);
    search(0, q, static_cast<std::size_t>(k), best);
    return best;
  }

private:
  static constexpr std::size_t kLeafSize = 8;

  struct Node {
    std::size_t begin = 0, end = 0;
    Vec3 lo, hi;  // tight bounds of the node's points
    std::size_t left = 0, right = 0;
    bool leaf = true;
  };

  std::size_t build(std::size_t begin, std::size_t end) {
    const std::size_t index = nodes_.size();
    Vec3 lo = points_[order_[begin]], hi = lo;
    for (std::size_t i = begin; i < end; ++i)
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], points_[order_[i]][a]);
        hi[a] = std::max(hi[a], points_[order_[i]][a]);
      }
    nodes_.push_back({begin, end, lo, hi});
    if (end - begin <= kLeafSize) return index;
    int axis = 0;
    for (int a = 1; a < 3; ++a)
      if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
    if (hi[axis] == lo[axis]) return index;  // coincident points stay in one leaf
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    Node& n = nodes_[index];
    n.leaf = false;
    n.left = left;
    n.right = right;
    return index;
  }

  void offer(Neighbor cand, std::size_t k, std::vector<Neighbor>& best) const {
    if (best.size() == k && !(cand < best.back())) return;
    best.insert(std::upper_bound(best.begin(), best.end(), cand), cand);
    if (best.size() > k) best.pop_back();
  }

  double box_distance(const Node& n, Vec3 q) const {
    double s = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double d = std::max({n.lo[a] - q[a], 0.0, q[a] - n.hi[a]});
      s += d * d;
    }
    return std::sqrt(s);
  }

  // Equal distances must still be visited so that ties resolve by id; the
  // slack covers rounding in the computed lengths.
  static bool may_improve(double bound, std::size_t k, const std::vector<Neighbor>& best) {
    return best.size() < k || bound <= best.back().distance * (1.0 + 1e-12);
  }

  void search(std::size_t index, Vec3 q, std::size_t k, std::vector<Neighbor>& best) const {
    const Node& n = nodes_[index];
    if (n.leaf) {
      for (std::size_t i = n.begin; i < n.end; ++i) offer({length(points_[order_[i]] - q), ids_[order_[i]]}, k, best);
      return;
    }
    double dl = box_distance(nodes_[n.left], q), dr = box_distance(nodes_[n.right], q);
    std::size_t near = n.left, far = n.right;
    if (dr < dl) std::swap(near, far), std::swap(dl, dr);
    if (may_improve(dl, k, best)) search(near, q, k, best);
    if (may_improve(dr, k, best)) search(far, q, k, best);
  }

  std::vector<Vec3> points_;
  std::vector<int> ids_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

}  // namespace jigsaw3d
