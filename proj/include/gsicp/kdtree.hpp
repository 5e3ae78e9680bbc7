// gsicp: geometrically stable ICP with odometry priors
// SPDX-License-Identifier: MIT
//
// Static 3-D k-d tree for nearest-neighbor and k-NN queries.

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "gsicp/error.hpp"
#include "gsicp/point_cloud.hpp"

namespace gsicp {

/// Balanced k-d tree over the points of a cloud; immutable after build, so
/// queries are read-only and safe to run concurrently.
/// Queries return indices into the original cloud.
class SpatialIndex {
 public:
  explicit SpatialIndex(const PointCloud& cloud)
      : SpatialIndex(cloud.points) {}

  explicit SpatialIndex(const std::vector<Eigen::Vector3d>& points) {
    if (points.empty()) throw EmptyCloud("cannot build index over empty cloud");
    pts_ = points;
    order_.resize(pts_.size());
    for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
    nodes_.reserve(2 * pts_.size() / kLeafSize + 2);
    root_ = build(0, static_cast<std::uint32_t>(pts_.size()));
  }

  std::size_t size() const { return pts_.size(); }

  /// Closest indexed point to q if it lies within d_max, as (index, distance).
  std::optional<std::pair<std::size_t, double>> nearest(
      const Eigen::Vector3d& q, double d_max) const {
    double best_sq = d_max < std::numeric_limits<double>::infinity()
                         ? d_max * d_max
                         : std::numeric_limits<double>::infinity();
    std::int32_t best = -1;
    search_nearest(root_, q, best_sq, best);
    if (best < 0) return std::nullopt;
    return std::make_pair(static_cast<std::size_t>(order_[best]),
                          std::sqrt(best_sq));
  }

  /// Indices of the k nearest points to q, ascending by distance.
  /// Returns fewer than k when the cloud is smaller.
  void knn(const Eigen::Vector3d& q, std::size_t k,
           std::vector<std::size_t>& out) const {
    out.clear();
    if (k == 0) return;
    std::vector<std::pair<double, std::uint32_t>> heap;
    heap.reserve(k + 1);
    search_knn(root_, q, k, heap);
    std::sort(heap.begin(), heap.end());
    out.reserve(heap.size());
    for (const auto& h : heap) out.push_back(order_[h.second]);
  }

 private:
  static constexpr std::uint32_t kLeafSize = 12;

  struct Node {
    // Leaf when count > 0; internal nodes store the split plane.
    std::uint32_t begin = 0;
    std::uint32_t count = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double split = 0.0;
    std::uint8_t axis = 0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end) {
    Node node;
    if (end - begin <= kLeafSize) {
      node.begin = begin;
      node.count = end - begin;
      nodes_.push_back(node);
      return static_cast<std::int32_t>(nodes_.size() - 1);
    }
    // Split on the widest axis at the median. After nth_element every point
    // left of mid is <= the median coordinate and every point from mid on is
    // >= it, which keeps the plane-distance pruning in the queries exact.
    Eigen::Vector3d lo = pts_[order_[begin]];
    Eigen::Vector3d hi = lo;
    for (std::uint32_t i = begin + 1; i < end; ++i) {
      lo = lo.cwiseMin(pts_[order_[i]]);
      hi = hi.cwiseMax(pts_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid,
                     order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       return pts_[a][axis] < pts_[b][axis];
                     });
    node.axis = static_cast<std::uint8_t>(axis);
    node.split = pts_[order_[mid]][axis];
    nodes_.push_back(node);
    const auto self = static_cast<std::int32_t>(nodes_.size() - 1);
    const std::int32_t l = build(begin, mid);
    const std::int32_t r = build(mid, end);
    nodes_[self].left = l;
    nodes_[self].right = r;
    return self;
  }

  void search_nearest(std::int32_t ni, const Eigen::Vector3d& q,
                      double& best_sq, std::int32_t& best) const {
    const Node& node = nodes_[ni];
    if (node.count > 0) {
      for (std::uint32_t i = node.begin; i < node.begin + node.count; ++i) {
        const double d = (pts_[order_[i]] - q).squaredNorm();
        if (d < best_sq) {
          best_sq = d;
          best = static_cast<std::int32_t>(i);
        }
      }
      return;
    }
    const double delta = q[node.axis] - node.split;
    const std::int32_t first = delta < 0.0 ? node.left : node.right;
    const std::int32_t second = delta < 0.0 ? node.right : node.left;
    search_nearest(first, q, best_sq, best);
    if (delta * delta <= best_sq) search_nearest(second, q, best_sq, best);
  }

  void search_knn(std::int32_t ni, const Eigen::Vector3d& q, std::size_t k,
                  std::vector<std::pair<double, std::uint32_t>>& heap) const {
    const Node& node = nodes_[ni];
    if (node.count > 0) {
      for (std::uint32_t i = node.begin; i < node.begin + node.count; ++i) {
        const double d = (pts_[order_[i]] - q).squaredNorm();
        if (heap.size() < k) {
          heap.emplace_back(d, i);
          std::push_heap(heap.begin(), heap.end());
        } else if (d < heap.front().first) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = {d, i};
          std::push_heap(heap.begin(), heap.end());
        }
      }
      return;
    }
    const double delta = q[node.axis] - node.split;
    const std::int32_t first = delta < 0.0 ? node.left : node.right;
    const std::int32_t second = delta < 0.0 ? node.right : node.left;
    search_knn(first, q, k, heap);
    const double worst = heap.size() < k
                             ? std::numeric_limits<double>::infinity()
                             : heap.front().first;
    if (delta * delta <= worst) search_knn(second, q, k, heap);
  }

  std::vector<Eigen::Vector3d> pts_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

/// Spec-style free function shims over the index.
inline SpatialIndex build_index(const PointCloud& cloud) {
  return SpatialIndex(cloud);
}

inline std::optional<std::pair<std::size_t, double>> nearest(
    const SpatialIndex& index, const Eigen::Vector3d& q, double d_max) {
  return index.nearest(q, d_max);
}

}  // namespace gsicp
