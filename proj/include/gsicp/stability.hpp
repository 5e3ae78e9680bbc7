// gsicp: geometrically stable ICP with odometry priors
// SPDX-License-Identifier: MIT
//
// Geometric stability of the linearized point-to-plane problem: the 6x6
// constraint covariance C = F F^T built from a sample, its eigen structure,
// and the condition-number gate that decides whether the geometry constrains
// all six degrees of freedom well enough for ICP to be trusted.

#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <vector>

#include "gsicp/error.hpp"
#include "gsicp/sampling.hpp"

namespace gsicp {

using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix6 = Eigen::Matrix<double, 6, 6>;

/// 6x6 symmetric PSD constraint covariance, row/col order
/// [rotation(3); translation(3)]. Points are centered on the sample centroid
/// and scaled so the rotational and translational blocks are commensurate;
/// the normalization terms are kept for diagnostics.
struct ConstraintMatrix {
  Matrix6 m = Matrix6::Zero();
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  double scale = 1.0;
};

/// Gate verdict plus the eigen structure it was derived from. Eigenvalues are
/// sorted descending; eigenvector j sits in column j. Directions whose
/// eigenvalue is small relative to the largest are the sliding directions:
/// transforms the data cannot observe.
struct StabilityReport {
  Vector6 eigenvalues = Vector6::Zero();
  Matrix6 eigenvectors = Matrix6::Identity();
  double condition_number = std::numeric_limits<double>::infinity();
  bool stable = false;
  std::vector<Vector6> sliding_directions;
};

/// Builds C = sum_i f_i f_i^T with f_i = [p'_i x n_i; n_i].
///
/// Normalization: p' = (p - centroid) / s with s the RMS lever arm
/// sqrt(mean |(p - centroid) x n|^2). This makes the rotation and translation
/// blocks carry equal trace for isotropically constrained geometry, so the
/// condition number is invariant to where the sample sits in the world and to
/// uniform scaling of the scene; a fixed gate threshold then has a meaning.
/// Samples with no usable lever arms (e.g. radial normals) fall back to
/// s = 1, where the rotation block vanishes anyway.
inline ConstraintMatrix build_constraint_matrix(const SampleSet& s) {
  if (s.size() < 6) {
    throw TooFewSamples("constraint matrix needs at least 6 samples, got " +
                        std::to_string(s.size()));
  }
  ConstraintMatrix c;
  for (const auto& p : s.points) c.centroid += p;
  c.centroid /= static_cast<double>(s.size());

  double lever_sq = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    lever_sq += (s.points[i] - c.centroid).cross(s.normals[i]).squaredNorm();
  }
  lever_sq /= static_cast<double>(s.size());
  c.scale = lever_sq > 1e-24 ? std::sqrt(lever_sq) : 1.0;

  for (std::size_t i = 0; i < s.size(); ++i) {
    const Eigen::Vector3d p = (s.points[i] - c.centroid) / c.scale;
    Vector6 f;
    f << p.cross(s.normals[i]), s.normals[i];
    c.m.noalias() += f * f.transpose();
  }
  // Clean up round-off asymmetry.
  c.m = 0.5 * (c.m + c.m.transpose()).eval();
  return c;
}

/// Self-adjoint eigendecomposition with eigenvalues sorted descending.
inline std::pair<Vector6, Matrix6> eigen_sym6(const ConstraintMatrix& c) {
  const double scale_ref = std::max(1.0, c.m.cwiseAbs().maxCoeff());
  if (((c.m - c.m.transpose()).cwiseAbs().maxCoeff()) > 1e-9 * scale_ref) {
    throw NotSymmetric("constraint matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix6> eig(c.m);
  Vector6 values;
  Matrix6 vectors;
  for (int i = 0; i < 6; ++i) {
    values[i] = eig.eigenvalues()[5 - i];
    vectors.col(i) = eig.eigenvectors().col(5 - i);
  }
  return {values, vectors};
}

/// Relative floor below which an eigenvalue counts as numerically zero and
/// the condition number is reported as infinite.
inline constexpr double kEigenvalueFloor = 1e-10;

/// Builds the constraint matrix from the sample, eigen-analyzes it and
/// applies the condition-number gate: stable iff the smallest eigenvalue is
/// numerically nonzero and lambda_1 / lambda_6 <= c_thres. Eigenvectors
/// failing the ratio test are reported as sliding directions.
inline StabilityReport assess_stability(const SampleSet& s, double c_thres) {
  if (!(c_thres >= 1.0)) throw BadParams("c_thres must be >= 1");
  const ConstraintMatrix c = build_constraint_matrix(s);
  auto [values, vectors] = eigen_sym6(c);
  // PSD up to round-off; clamp tiny negative values.
  for (int i = 0; i < 6; ++i) values[i] = std::max(values[i], 0.0);

  StabilityReport report;
  report.eigenvalues = values;
  report.eigenvectors = vectors;

  const double floor = kEigenvalueFloor * values[0];
  for (int j = 1; j < 6; ++j) {
    const bool zero = values[j] <= floor;
    if (zero || values[0] / values[j] > c_thres) {
      report.sliding_directions.push_back(vectors.col(j));
    }
  }
  if (values[5] > floor) {
    report.condition_number = values[0] / values[5];
    report.stable = report.condition_number <= c_thres;
  } else {
    report.condition_number = std::numeric_limits<double>::infinity();
    report.stable = false;
  }
  return report;
}

}  // namespace gsicp
