// gsicp: geometrically stable ICP with odometry priors
// SPDX-License-Identifier: MIT
//
// Trajectory evaluation: stamp association, rigid (Umeyama) alignment,
// absolute trajectory error and per-step relative pose error statistics.

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gsicp/error.hpp"
#include "gsicp/geometry.hpp"

namespace gsicp {

struct EvaluationReport {
  std::size_t matched = 0;
  double ate_rmse = 0.0;       // meters, after rigid alignment
  double rpe_trans_mean = 0.0; // meters per step
  double rpe_trans_rmse = 0.0;
  double rpe_trans_max = 0.0;
  double rpe_rot_mean = 0.0;   // radians per step
  double rpe_rot_rmse = 0.0;
  double rpe_rot_max = 0.0;
};

/// Greedy nearest-stamp association within `tol` seconds; each reference
/// pose is used at most once. Input trajectories are stamp-sorted.
inline std::vector<std::pair<std::size_t, std::size_t>> associate_stamps(
    const std::vector<Pose>& est, const std::vector<Pose>& ref,
    double tol = 0.05) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t j = 0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    while (j + 1 < ref.size() &&
           std::abs(ref[j + 1].stamp - est[i].stamp) <=
               std::abs(ref[j].stamp - est[i].stamp)) {
      ++j;
    }
    if (j < ref.size() && std::abs(ref[j].stamp - est[i].stamp) <= tol) {
      pairs.emplace_back(i, j);
      ++j;
      if (j >= ref.size()) break;
    }
  }
  return pairs;
}

/// ATE RMSE and per-step RPE of `est` against `truth`. The estimated
/// trajectory is rigidly aligned to the truth first (Umeyama, no scale), so
/// a global frame offset does not count as error.
inline EvaluationReport evaluate_trajectory(const std::vector<Pose>& est,
                                            const std::vector<Pose>& truth,
                                            double tol = 0.05) {
  const auto pairs = associate_stamps(est, truth, tol);
  if (pairs.size() < 2) {
    throw IoError("trajectories share fewer than 2 associable stamps");
  }

  Eigen::MatrixXd src(3, pairs.size());
  Eigen::MatrixXd dst(3, pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    src.col(k) = est[pairs[k].first].transform.translation;
    dst.col(k) = truth[pairs[k].second].transform.translation;
  }
  const Eigen::Matrix4d align = Eigen::umeyama(src, dst, false);
  const Eigen::Matrix3d r = align.block<3, 3>(0, 0);
  const Eigen::Vector3d t = align.block<3, 1>(0, 3);

  EvaluationReport report;
  report.matched = pairs.size();
  double sum_sq = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    sum_sq += (r * src.col(k) + t - dst.col(k)).squaredNorm();
  }
  report.ate_rmse = std::sqrt(sum_sq / static_cast<double>(pairs.size()));

  double t_sum = 0.0, t_sq = 0.0, r_sum = 0.0, r_sq = 0.0;
  for (std::size_t k = 1; k < pairs.size(); ++k) {
    const RigidTransform d_est =
        compose(invert(est[pairs[k - 1].first].transform),
                est[pairs[k].first].transform);
    const RigidTransform d_truth =
        compose(invert(truth[pairs[k - 1].second].transform),
                truth[pairs[k].second].transform);
    const PoseError e = pose_error(d_est, d_truth);
    t_sum += e.translation;
    t_sq += e.translation * e.translation;
    r_sum += e.rotation;
    r_sq += e.rotation * e.rotation;
    report.rpe_trans_max = std::max(report.rpe_trans_max, e.translation);
    report.rpe_rot_max = std::max(report.rpe_rot_max, e.rotation);
  }
  const double n = static_cast<double>(pairs.size() - 1);
  report.rpe_trans_mean = t_sum / n;
  report.rpe_trans_rmse = std::sqrt(t_sq / n);
  report.rpe_rot_mean = r_sum / n;
  report.rpe_rot_rmse = std::sqrt(r_sq / n);
  return report;
}

}  // namespace gsicp
