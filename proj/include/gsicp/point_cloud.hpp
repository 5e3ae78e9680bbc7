// gsicp: geometrically stable ICP with odometry priors
// SPDX-License-Identifier: MIT

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace gsicp {

/// Ordered set of 3-D points in meters, with optional per-point unit normals.
///
/// When `normals` is non-empty it has the same length as `points`, and
/// `normal_valid[i]` tells whether normal estimation produced a usable
/// direction at point i (degenerate neighborhoods are kept in the cloud but
/// flagged so sampling and stability analysis skip them).
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3d> normals;
  std::vector<std::uint8_t> normal_valid;
  std::string frame;
  double stamp = 0.0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_normals() const { return !normals.empty(); }

  void reserve(std::size_t n) {
    points.reserve(n);
    if (has_normals()) {
      normals.reserve(n);
      normal_valid.reserve(n);
    }
  }
};

/// Appends all points (and normals, if both clouds carry them) of `src`.
inline void append(PointCloud& dst, const PointCloud& src) {
  dst.points.insert(dst.points.end(), src.points.begin(), src.points.end());
  if (dst.has_normals() || src.has_normals()) {
    // Mixed input: a cloud without normals contributes invalid ones.
    dst.normals.resize(dst.points.size(), Eigen::Vector3d::Zero());
    dst.normal_valid.resize(dst.points.size(), 0);
    const std::size_t base = dst.points.size() - src.points.size();
    for (std::size_t i = 0; i < src.normals.size(); ++i) {
      dst.normals[base + i] = src.normals[i];
      dst.normal_valid[base + i] = src.normal_valid[i];
    }
  }
}

}  // namespace gsicp
