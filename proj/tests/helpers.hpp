// Shared fixture builders for the test suites.
#pragma once

#include <random>

#include "gsicp/point_cloud.hpp"

namespace test_helpers {

// Three orthogonal gridded unit squares meeting at the origin, with exact
// analytic normals (+x, +y, +z faces).
inline gsicp::PointCloud corner_grid(int per_side = 24) {
  gsicp::PointCloud cloud;
  const double step = 1.0 / per_side;
  auto add_face = [&](int axis) {
    for (int i = 0; i < per_side; ++i) {
      for (int j = 0; j < per_side; ++j) {
        Eigen::Vector3d p;
        p[axis] = 0.0;
        p[(axis + 1) % 3] = (i + 0.5) * step;
        p[(axis + 2) % 3] = (j + 0.5) * step;
        Eigen::Vector3d n = Eigen::Vector3d::Zero();
        n[axis] = 1.0;
        cloud.points.push_back(p);
        cloud.normals.push_back(n);
        cloud.normal_valid.push_back(1);
      }
    }
  };
  add_face(0);
  add_face(1);
  add_face(2);
  return cloud;
}

// Gridded plane z = 0 with +z normals.
inline gsicp::PointCloud plane_grid(int per_side = 30, double spacing = 0.01) {
  gsicp::PointCloud cloud;
  for (int i = 0; i < per_side; ++i) {
    for (int j = 0; j < per_side; ++j) {
      cloud.points.emplace_back(spacing * i, spacing * j, 0.0);
      cloud.normals.emplace_back(0.0, 0.0, 1.0);
      cloud.normal_valid.push_back(1);
    }
  }
  return cloud;
}

}  // namespace test_helpers
