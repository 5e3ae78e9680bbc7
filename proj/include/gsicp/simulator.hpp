// gsicp: geometrically stable ICP with odometry priors
// SPDX-License-Identifier: MIT
//
// Depth-sensor frustum model, trajectory generators and odometry noise
// injection. Everything is seeded and deterministic.

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <random>
#include <vector>

#include "gsicp/error.hpp"
#include "gsicp/geometry.hpp"
#include "gsicp/point_cloud.hpp"
#include "gsicp/scene.hpp"

namespace gsicp {

/// Pinhole-style depth sensor: one ray per pixel, radial range measurement.
/// Camera frame: +z forward (viewing axis), +x right, +y down.
struct SensorModel {
  double hfov_deg = 62.0;
  double vfov_deg = 45.0;
  int width = 224;
  int height = 171;
  double min_range = 0.1;
  double max_range = 4.0;
  double range_sigma = 0.0;  // meters, Gaussian radial noise
  std::uint64_t seed = 0;
};

/// Per-step odometry corruption: zero-mean Gaussian twist plus an optional
/// constant per-step bias, standing in for visual-inertial drift.
struct NoiseModel {
  double sigma_t = 0.0;  // meters per step, per axis
  double sigma_r = 0.0;  // radians per step, per axis
  Eigen::Vector3d bias_t = Eigen::Vector3d::Zero();
  Eigen::Vector3d bias_r = Eigen::Vector3d::Zero();
  std::uint64_t seed = 0;
};

/// Casts one ray per pixel through the frustum; the nearest surface hit whose
/// range lies in [min_range, max_range] becomes a point in the SENSOR frame,
/// with the radial range perturbed by seeded Gaussian noise. Pixels traverse
/// in row-major order, so output is deterministic per seed.
inline PointCloud render_depth(const Scene& scene, const RigidTransform& pose,
                               const SensorModel& sensor) {
  if (sensor.width <= 0 || sensor.height <= 0) {
    throw BadParams("sensor resolution must be positive");
  }
  const double tan_h = std::tan(0.5 * sensor.hfov_deg * M_PI / 180.0);
  const double tan_v = std::tan(0.5 * sensor.vfov_deg * M_PI / 180.0);
  const Eigen::Vector3d origin = pose.translation;
  std::mt19937_64 rng(sensor.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  PointCloud cloud;
  cloud.frame = "sensor";
  cloud.points.reserve(static_cast<std::size_t>(sensor.width) * sensor.height);
  for (int row = 0; row < sensor.height; ++row) {
    const double v = (2.0 * (row + 0.5) / sensor.height - 1.0) * tan_v;
    for (int col = 0; col < sensor.width; ++col) {
      const double u = (2.0 * (col + 0.5) / sensor.width - 1.0) * tan_h;
      const Eigen::Vector3d dir_cam = Eigen::Vector3d(u, v, 1.0).normalized();
      const Eigen::Vector3d dir_world = pose.rotation * dir_cam;
      const auto hit = scene.raycast(origin, dir_world);
      if (!hit || hit->t < sensor.min_range || hit->t > sensor.max_range) {
        continue;
      }
      double range = hit->t;
      if (sensor.range_sigma > 0.0) range += sensor.range_sigma * gauss(rng);
      cloud.points.emplace_back(range * dir_cam);
    }
  }
  return cloud;
}

enum class TrajectoryKind { kOrbit, kCorridorPass, kWallFacing, kLawnmower };

struct TrajectoryParams {
  int frames = 60;
  double rate_hz = 1.0;
  double start_time = 0.0;

  // kOrbit: arc of `arc_deg` degrees on a circle of `radius` around
  // `center`, heading at the center, pitched down by `pitch_deg`.
  Eigen::Vector3d center{0.0, 0.0, 0.0};
  double radius = 0.9;
  double arc_deg = 360.0;
  double pitch_deg = 0.0;

  // kCorridorPass: straight line start -> end, heading along the motion.
  Eigen::Vector3d start{0.0, 0.0, 0.0};
  Eigen::Vector3d end{0.0, 1.0, 0.0};

  // kWallFacing: constant viewing axis `view_dir`, translating along
  // `lateral` (must be orthogonal to the view) by `travel` meters total.
  Eigen::Vector3d view_dir{-1.0, 0.0, 0.0};
  Eigen::Vector3d lateral{0.0, 1.0, 0.0};
  double travel = 3.0;

  // kLawnmower: rows of length `travel` along `lateral`, stepped by
  // `row_step` along `view_dir x lateral`-free axis below.
  int rows = 3;
  double row_step = 0.4;
};

namespace detail {

/// Right-handed camera rotation with +z along `view`.
inline Eigen::Quaterniond look_rotation(const Eigen::Vector3d& view) {
  const Eigen::Vector3d z = view.normalized();
  Eigen::Vector3d up(0.0, 0.0, 1.0);
  if (std::abs(z.dot(up)) > 0.999) up = Eigen::Vector3d(1.0, 0.0, 0.0);
  const Eigen::Vector3d x = z.cross(up).normalized();
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return Eigen::Quaterniond(r);
}

}  // namespace detail

/// Timestamped sensor-in-world pose sequences at a fixed rate.
inline std::vector<Pose> make_trajectory(TrajectoryKind kind,
                                         const TrajectoryParams& p) {
  if (p.frames < 2) throw BadParams("trajectory needs at least 2 frames");
  if (!(p.rate_hz > 0.0)) throw BadParams("trajectory rate must be > 0");
  const double dt = 1.0 / p.rate_hz;
  std::vector<Pose> poses;
  poses.reserve(p.frames);

  switch (kind) {
    case TrajectoryKind::kOrbit: {
      if (!(p.radius > 0.0)) throw BadParams("orbit radius must be > 0");
      const double arc = p.arc_deg * M_PI / 180.0;
      // A full circle does not duplicate the first pose; partial arcs end
      // exactly at the requested angle.
      const double step = std::abs(p.arc_deg - 360.0) < 1e-9
                              ? arc / p.frames
                              : arc / (p.frames - 1);
      for (int k = 0; k < p.frames; ++k) {
        const double theta = step * k;
        const Eigen::Vector3d pos =
            p.center + p.radius * Eigen::Vector3d(std::cos(theta),
                                                  std::sin(theta), 0.0);
        Eigen::Vector3d view = p.center - pos;
        view.z() = 0.0;
        Eigen::Quaterniond q = detail::look_rotation(view);
        if (p.pitch_deg != 0.0) {
          // Rotating the body about the camera x-axis by -pitch turns the
          // viewing axis toward +y_cam, which is downward in this camera
          // convention.
          q = q * Eigen::Quaterniond(Eigen::AngleAxisd(
                      -p.pitch_deg * M_PI / 180.0, Eigen::Vector3d::UnitX()));
        }
        poses.push_back({p.start_time + k * dt, RigidTransform(q, pos)});
      }
      break;
    }
    case TrajectoryKind::kCorridorPass: {
      const Eigen::Vector3d axis = p.end - p.start;
      if (axis.norm() < 1e-9) throw BadParams("corridor pass needs distinct endpoints");
      const Eigen::Quaterniond q = detail::look_rotation(axis);
      for (int k = 0; k < p.frames; ++k) {
        const double s = static_cast<double>(k) / (p.frames - 1);
        poses.push_back({p.start_time + k * dt,
                         RigidTransform(q, p.start + s * axis)});
      }
      break;
    }
    case TrajectoryKind::kWallFacing: {
      if (std::abs(p.view_dir.normalized().dot(p.lateral.normalized())) > 1e-9) {
        throw BadParams("wall-facing lateral direction must be orthogonal to the view");
      }
      const Eigen::Quaterniond q = detail::look_rotation(p.view_dir);
      const Eigen::Vector3d lateral = p.lateral.normalized();
      for (int k = 0; k < p.frames; ++k) {
        const double s = p.travel * k / (p.frames - 1);
        poses.push_back({p.start_time + k * dt,
                         RigidTransform(q, p.start + s * lateral)});
      }
      break;
    }
    case TrajectoryKind::kLawnmower: {
      if (p.rows < 1) throw BadParams("lawnmower needs at least one row");
      const Eigen::Vector3d along = p.lateral.normalized();
      const Eigen::Vector3d step = along.cross(Eigen::Vector3d(0, 0, 1)).norm() > 1e-9
                                       ? along.cross(Eigen::Vector3d(0, 0, 1)).normalized()
                                       : Eigen::Vector3d(1, 0, 0);
      const int per_row = std::max(p.frames / p.rows, 2);
      int k = 0;
      for (int r = 0; r < p.rows && k < p.frames; ++r) {
        const Eigen::Vector3d row_start = p.start + r * p.row_step * step;
        const Eigen::Vector3d dir = (r % 2 == 0) ? along : -along;
        const Eigen::Vector3d base =
            (r % 2 == 0) ? row_start : row_start + p.travel * along;
        const Eigen::Quaterniond q = detail::look_rotation(dir);
        for (int i = 0; i < per_row && k < p.frames; ++i, ++k) {
          const double s = p.travel * i / (per_row - 1);
          poses.push_back({p.start_time + k * dt,
                           RigidTransform(q, base + s * dir)});
        }
      }
      break;
    }
  }
  return poses;
}

/// Per-step relative transforms between consecutive truth poses, each
/// composed with a seeded random twist. sigma = 0 reproduces the truth.
inline std::vector<RigidTransform> perturb_odometry(
    const std::vector<Pose>& truth, const NoiseModel& noise) {
  if (truth.size() < 2) throw BadParams("need at least 2 poses to perturb");
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<RigidTransform> rels;
  rels.reserve(truth.size() - 1);
  for (std::size_t k = 1; k < truth.size(); ++k) {
    const RigidTransform rel =
        compose(invert(truth[k - 1].transform), truth[k].transform);
    Eigen::Vector3d dr = noise.bias_r;
    Eigen::Vector3d dtr = noise.bias_t;
    if (noise.sigma_r > 0.0) {
      dr += noise.sigma_r * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    }
    if (noise.sigma_t > 0.0) {
      dtr += noise.sigma_t * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    }
    rels.push_back(compose(rel, exp_small(TwistDelta(dr, dtr))));
  }
  return rels;
}

/// Chains per-step relative transforms from a starting pose.
inline std::vector<Pose> integrate_relative(
    const Pose& start, const std::vector<RigidTransform>& rels,
    const std::vector<double>& stamps) {
  if (stamps.size() != rels.size() + 1) {
    throw BadParams("integrate_relative: stamps must be rels.size() + 1");
  }
  std::vector<Pose> out;
  out.reserve(stamps.size());
  out.push_back({stamps[0], start.transform});
  for (std::size_t k = 0; k < rels.size(); ++k) {
    out.push_back({stamps[k + 1], compose(out.back().transform, rels[k])});
  }
  return out;
}

}  // namespace gsicp
