// gsicp: geometrically stable ICP with odometry priors
// SPDX-License-Identifier: MIT
//
// SE(3) rigid transforms, small-angle twists and pose-error metrics.

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>

#include "gsicp/error.hpp"
#include "gsicp/point_cloud.hpp"

namespace gsicp {

/// Normalizes a quaternion and flips its sign so that w >= 0, removing the
/// double-cover ambiguity.
inline Eigen::Quaterniond canonicalized(const Eigen::Quaterniond& q) {
  Eigen::Quaterniond out = q.normalized();
  if (out.w() < 0.0) out.coeffs() = -out.coeffs();
  return out;
}

/// SE(3) element stored as unit quaternion + translation (meters).
/// The quaternion is renormalized and sign-canonicalized on construction and
/// after every operation.
struct RigidTransform {
  Eigen::Quaterniond rotation{1.0, 0.0, 0.0, 0.0};
  Eigen::Vector3d translation{0.0, 0.0, 0.0};

  RigidTransform() = default;
  RigidTransform(const Eigen::Quaterniond& q, const Eigen::Vector3d& t)
      : rotation(canonicalized(q)), translation(t) {}

  static RigidTransform identity() { return RigidTransform(); }

  static RigidTransform from_translation(const Eigen::Vector3d& t) {
    return RigidTransform(Eigen::Quaterniond::Identity(), t);
  }

  static RigidTransform from_rotation(const Eigen::Quaterniond& q) {
    return RigidTransform(q, Eigen::Vector3d::Zero());
  }

  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }
};

/// a after b: the result applies b first, then a.
inline RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return RigidTransform(a.rotation * b.rotation,
                        a.rotation * b.translation + a.translation);
}

inline RigidTransform invert(const RigidTransform& t) {
  const Eigen::Quaterniond qi = t.rotation.conjugate();
  return RigidTransform(qi, -(qi * t.translation));
}

/// Transforms all points (and normals, if present) of a cloud. The frame tag
/// can be rewritten when the target frame is known; by default it is kept.
inline PointCloud apply(const RigidTransform& t, const PointCloud& cloud,
                        const std::string& new_frame = std::string()) {
  PointCloud out = cloud;
  for (auto& p : out.points) p = t.rotation * p + t.translation;
  for (auto& n : out.normals) n = t.rotation * n;
  if (!new_frame.empty()) out.frame = new_frame;
  return out;
}

/// Small rigid correction: 3-vector of small-angle rotation (radians) plus a
/// translation (meters), the unknowns of the linearized point-to-plane solve.
/// Only valid in the small-angle regime |rot| < 0.5 rad.
struct TwistDelta {
  Eigen::Vector3d rot{0.0, 0.0, 0.0};
  Eigen::Vector3d trans{0.0, 0.0, 0.0};

  TwistDelta() = default;
  TwistDelta(const Eigen::Vector3d& r, const Eigen::Vector3d& t)
      : rot(r), trans(t) {
    if (!(rot.norm() < 0.5)) {
      throw SmallAngleViolation("twist rotation magnitude " +
                                std::to_string(rot.norm()) +
                                " rad is outside the small-angle regime");
    }
  }

  explicit TwistDelta(const Eigen::Matrix<double, 6, 1>& x)
      : TwistDelta(x.head<3>(), x.tail<3>()) {}

  Eigen::Matrix<double, 6, 1> vector() const {
    Eigen::Matrix<double, 6, 1> x;
    x << rot, trans;
    return x;
  }
};

/// Maps a small twist onto SE(3). The rotation uses the exact axis-angle
/// exponential (not its linearization) so repeated application of solver
/// steps cannot drift off the manifold; the translation is taken verbatim,
/// matching the linearized error model.
inline RigidTransform exp_small(const TwistDelta& d) {
  const double angle = d.rot.norm();
  if (!(angle < 0.5)) {
    throw SmallAngleViolation("exp_small called with |rot| = " +
                              std::to_string(angle));
  }
  if (angle < 1e-14) {
    return RigidTransform(Eigen::Quaterniond::Identity(), d.trans);
  }
  const Eigen::AngleAxisd aa(angle, d.rot / angle);
  return RigidTransform(Eigen::Quaterniond(aa), d.trans);
}

struct PoseError {
  double translation = 0.0;  // meters
  double rotation = 0.0;     // radians
};

/// Translation distance and geodesic rotation angle between two transforms.
inline PoseError pose_error(const RigidTransform& est, const RigidTransform& truth) {
  PoseError e;
  e.translation = (est.translation - truth.translation).norm();
  const Eigen::Quaterniond qd = truth.rotation.conjugate() * est.rotation;
  e.rotation = 2.0 * std::atan2(qd.vec().norm(), std::abs(qd.w()));
  return e;
}

/// Timestamped pose; containers of these declare which frame convention the
/// transform uses (sensor-in-world for trajectories in this project).
struct Pose {
  double stamp = 0.0;
  RigidTransform transform;
};

}  // namespace gsicp
