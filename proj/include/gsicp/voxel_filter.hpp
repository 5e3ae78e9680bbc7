// gsicp: geometrically stable ICP with odometry priors
// SPDX-License-Identifier: MIT
//
// Voxel-grid noise reduction: one centroid point per occupied cell.

#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "gsicp/error.hpp"
#include "gsicp/point_cloud.hpp"

namespace gsicp {

struct VoxelParams {
  double leaf = 0.01;  // meters, > 0
};

namespace detail {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
  bool operator<(const VoxelKey& o) const {
    if (x != o.x) return x < o.x;
    if (y != o.y) return y < o.y;
    return z < o.z;
  }
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::int64_t v : {k.x, k.y, k.z}) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace detail

/// Accumulates points into a voxel grid and materializes one centroid per
/// occupied cell, ordered by voxel key. Used one-shot by voxel_filter and
/// incrementally by the pipeline's global map.
class VoxelGridAccumulator {
 public:
  explicit VoxelGridAccumulator(double leaf) : leaf_(leaf) {
    if (!(leaf > 0.0)) throw BadParams("voxel leaf must be > 0");
  }

  void add(const PointCloud& cloud) {
    const bool with_normals = cloud.has_normals();
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      Cell& c = cells_[key_of(cloud.points[i])];
      c.sum += cloud.points[i];
      c.count += 1;
      if (with_normals && cloud.normal_valid[i]) {
        c.normal_sum += cloud.normals[i];
        c.normal_count += 1;
      }
    }
    saw_normals_ = saw_normals_ || with_normals;
  }

  std::size_t occupied() const { return cells_.size(); }

  /// One point per occupied voxel: the centroid of its members, with the
  /// renormalized mean of valid member normals when the input had normals.
  PointCloud extract() const {
    std::vector<std::pair<detail::VoxelKey, const Cell*>> ordered;
    ordered.reserve(cells_.size());
    for (const auto& kv : cells_) ordered.emplace_back(kv.first, &kv.second);
    std::sort(ordered.begin(), ordered.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    PointCloud out;
    out.points.reserve(ordered.size());
    if (saw_normals_) {
      out.normals.reserve(ordered.size());
      out.normal_valid.reserve(ordered.size());
    }
    for (const auto& [key, cell] : ordered) {
      out.points.push_back(cell->sum / static_cast<double>(cell->count));
      if (saw_normals_) {
        const double len = cell->normal_sum.norm();
        if (cell->normal_count > 0 && len > 1e-9) {
          out.normals.push_back(cell->normal_sum / len);
          out.normal_valid.push_back(1);
        } else {
          out.normals.push_back(Eigen::Vector3d::Zero());
          out.normal_valid.push_back(0);
        }
      }
    }
    return out;
  }

 private:
  struct Cell {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    Eigen::Vector3d normal_sum = Eigen::Vector3d::Zero();
    std::uint32_t count = 0;
    std::uint32_t normal_count = 0;
  };

  detail::VoxelKey key_of(const Eigen::Vector3d& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x() / leaf_)),
            static_cast<std::int64_t>(std::floor(p.y() / leaf_)),
            static_cast<std::int64_t>(std::floor(p.z() / leaf_))};
  }

  double leaf_;
  bool saw_normals_ = false;
  std::unordered_map<detail::VoxelKey, Cell, detail::VoxelKeyHash> cells_;
};

/// Downsamples a cloud to one centroid per occupied voxel. Deterministic:
/// output is ordered by voxel key. Empty input gives empty output.
inline PointCloud voxel_filter(const PointCloud& cloud, const VoxelParams& params) {
  VoxelGridAccumulator grid(params.leaf);
  grid.add(cloud);
  PointCloud out = grid.extract();
  out.frame = cloud.frame;
  out.stamp = cloud.stamp;
  return out;
}

}  // namespace gsicp
