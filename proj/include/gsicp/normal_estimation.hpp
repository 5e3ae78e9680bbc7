// gsicp: geometrically stable ICP with odometry priors
// SPDX-License-Identifier: MIT

#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cstddef>
#include <vector>

#include "gsicp/error.hpp"
#include "gsicp/kdtree.hpp"
#include "gsicp/point_cloud.hpp"

namespace gsicp {

/// Per-point normals from PCA over the k nearest neighbors: the normal is the
/// eigenvector of the smallest covariance eigenvalue, oriented toward the
/// viewpoint (the sensor origin for clouds in the sensor frame).
///
/// Neighborhoods whose covariance has rank < 2 (collinear or coincident
/// points) get a zero normal and normal_valid = 0 instead of a NaN direction.
inline PointCloud estimate_normals(const PointCloud& cloud, std::size_t k,
                                   const Eigen::Vector3d& viewpoint) {
  if (k < 3) throw BadParams("normal estimation needs k >= 3");
  if (cloud.size() < k) {
    throw TooFewPoints("cloud has " + std::to_string(cloud.size()) +
                       " points, normal estimation needs at least " +
                       std::to_string(k));
  }

  const SpatialIndex index(cloud);
  PointCloud out;
  out.points = cloud.points;
  out.frame = cloud.frame;
  out.stamp = cloud.stamp;
  out.normals.assign(cloud.size(), Eigen::Vector3d::Zero());
  out.normal_valid.assign(cloud.size(), 0);

  std::vector<std::size_t> nn;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    index.knn(cloud.points[i], k, nn);

    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (std::size_t j : nn) mean += cloud.points[j];
    mean /= static_cast<double>(nn.size());

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (std::size_t j : nn) {
      const Eigen::Vector3d d = cloud.points[j] - mean;
      cov.noalias() += d * d.transpose();
    }

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    const Eigen::Vector3d& ev = eig.eigenvalues();  // ascending
    // rank < 2: the mid eigenvalue vanishes relative to the largest.
    if (!(ev[2] > 0.0) || ev[1] <= 1e-9 * ev[2]) continue;

    Eigen::Vector3d n = eig.eigenvectors().col(0).normalized();
    if (n.dot(viewpoint - cloud.points[i]) < 0.0) n = -n;
    out.normals[i] = n;
    out.normal_valid[i] = 1;
  }
  return out;
}

}  // namespace gsicp
