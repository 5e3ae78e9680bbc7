// gsicp: geometrically stable ICP with odometry priors
// SPDX-License-Identifier: MIT
//
// Analytic scenes: surface primitives with exact ray casting and distance
// queries, plus the named fixtures used throughout the tests and the
// simulator CLI. No mesh assets; ground truth is exact by construction.

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gsicp/error.hpp"

namespace gsicp {

struct RayHit {
  double t = 0.0;            // range along the (unit) ray direction
  Eigen::Vector3d normal;    // geometric surface normal at the hit
};

class SurfacePrimitive {
 public:
  virtual ~SurfacePrimitive() = default;
  /// Closest intersection of the ray origin + t * dir (dir unit), t > 0.
  virtual std::optional<RayHit> raycast(const Eigen::Vector3d& origin,
                                        const Eigen::Vector3d& dir) const = 0;
  /// Unsigned distance from p to the primitive's surface.
  virtual double distance(const Eigen::Vector3d& p) const = 0;
};

/// Finite rectangle: center, two orthogonal unit edge directions and
/// half-extents along them. Normal = u x v.
class PlanePatch final : public SurfacePrimitive {
 public:
  PlanePatch(const Eigen::Vector3d& center, const Eigen::Vector3d& u,
             const Eigen::Vector3d& v, double half_u, double half_v)
      : center_(center),
        u_(u.normalized()),
        v_(v.normalized()),
        normal_(u_.cross(v_).normalized()),
        half_u_(half_u),
        half_v_(half_v) {
    if (!(half_u > 0.0) || !(half_v > 0.0) || std::abs(u_.dot(v_)) > 1e-9) {
      throw BadParams("plane patch needs orthogonal edges and positive extent");
    }
  }

  std::optional<RayHit> raycast(const Eigen::Vector3d& origin,
                                const Eigen::Vector3d& dir) const override {
    const double denom = dir.dot(normal_);
    if (std::abs(denom) < 1e-12) return std::nullopt;
    const double t = (center_ - origin).dot(normal_) / denom;
    if (t <= 1e-9) return std::nullopt;
    const Eigen::Vector3d local = origin + t * dir - center_;
    if (std::abs(local.dot(u_)) > half_u_ || std::abs(local.dot(v_)) > half_v_) {
      return std::nullopt;
    }
    return RayHit{t, normal_};
  }

  double distance(const Eigen::Vector3d& p) const override {
    const Eigen::Vector3d local = p - center_;
    const double du = std::max(std::abs(local.dot(u_)) - half_u_, 0.0);
    const double dv = std::max(std::abs(local.dot(v_)) - half_v_, 0.0);
    const double dn = local.dot(normal_);
    return std::sqrt(du * du + dv * dv + dn * dn);
  }

  const Eigen::Vector3d& normal() const { return normal_; }

 private:
  Eigen::Vector3d center_, u_, v_, normal_;
  double half_u_, half_v_;
};

/// Axis-aligned box. Rays report the closest face hit from outside or inside
/// (inside hits make box interiors usable as rooms). Distance is the exact
/// unsigned distance to the box surface.
class Box final : public SurfacePrimitive {
 public:
  Box(const Eigen::Vector3d& min, const Eigen::Vector3d& max)
      : min_(min), max_(max) {
    if ((max - min).minCoeff() <= 0.0) throw BadParams("degenerate box");
  }

  std::optional<RayHit> raycast(const Eigen::Vector3d& origin,
                                const Eigen::Vector3d& dir) const override {
    double t_enter = -std::numeric_limits<double>::infinity();
    double t_exit = std::numeric_limits<double>::infinity();
    int enter_axis = -1, exit_axis = -1;
    for (int a = 0; a < 3; ++a) {
      if (std::abs(dir[a]) < 1e-15) {
        if (origin[a] < min_[a] || origin[a] > max_[a]) return std::nullopt;
        continue;
      }
      double t0 = (min_[a] - origin[a]) / dir[a];
      double t1 = (max_[a] - origin[a]) / dir[a];
      if (t0 > t1) std::swap(t0, t1);
      if (t0 > t_enter) {
        t_enter = t0;
        enter_axis = a;
      }
      if (t1 < t_exit) {
        t_exit = t1;
        exit_axis = a;
      }
    }
    if (t_enter > t_exit) return std::nullopt;
    double t;
    int axis;
    if (t_enter > 1e-9) {
      t = t_enter;
      axis = enter_axis;
    } else if (t_exit > 1e-9) {
      t = t_exit;  // origin inside: hit the interior of the exit face
      axis = exit_axis;
    } else {
      return std::nullopt;
    }
    if (axis < 0) return std::nullopt;
    Eigen::Vector3d n = Eigen::Vector3d::Zero();
    const Eigen::Vector3d hit = origin + t * dir;
    const double mid = 0.5 * (min_[axis] + max_[axis]);
    n[axis] = hit[axis] > mid ? 1.0 : -1.0;
    return RayHit{t, n};
  }

  double distance(const Eigen::Vector3d& p) const override {
    // Standard box SDF magnitude.
    Eigen::Vector3d center = 0.5 * (min_ + max_);
    Eigen::Vector3d half = 0.5 * (max_ - min_);
    Eigen::Vector3d q = (p - center).cwiseAbs() - half;
    const double outside = q.cwiseMax(0.0).norm();
    const double inside = std::min(q.maxCoeff(), 0.0);
    return std::abs(outside + inside);
  }

 private:
  Eigen::Vector3d min_, max_;
};

/// Height-bounded lateral surface of a cylinder (no end caps).
class CylinderSection final : public SurfacePrimitive {
 public:
  CylinderSection(const Eigen::Vector3d& base_center, const Eigen::Vector3d& axis,
                  double radius, double half_height)
      : center_(base_center),
        axis_(axis.normalized()),
        radius_(radius),
        half_height_(half_height) {
    if (!(radius > 0.0) || !(half_height > 0.0)) {
      throw BadParams("cylinder needs positive radius and height");
    }
  }

  std::optional<RayHit> raycast(const Eigen::Vector3d& origin,
                                const Eigen::Vector3d& dir) const override {
    const Eigen::Vector3d oc = origin - center_;
    const Eigen::Vector3d d_perp = dir - dir.dot(axis_) * axis_;
    const Eigen::Vector3d o_perp = oc - oc.dot(axis_) * axis_;
    const double a = d_perp.squaredNorm();
    if (a < 1e-15) return std::nullopt;
    const double b = 2.0 * d_perp.dot(o_perp);
    const double c = o_perp.squaredNorm() - radius_ * radius_;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    for (double t : {(-b - sq) / (2 * a), (-b + sq) / (2 * a)}) {
      if (t <= 1e-9) continue;
      const Eigen::Vector3d hit = origin + t * dir;
      if (std::abs((hit - center_).dot(axis_)) > half_height_) continue;
      Eigen::Vector3d radial = hit - center_;
      radial -= radial.dot(axis_) * axis_;
      return RayHit{t, radial.normalized()};
    }
    return std::nullopt;
  }

  double distance(const Eigen::Vector3d& p) const override {
    const Eigen::Vector3d local = p - center_;
    const double z = local.dot(axis_);
    const double r = (local - z * axis_).norm();
    const double dr = r - radius_;
    const double dz = std::max(std::abs(z) - half_height_, 0.0);
    return dz > 0.0 ? std::hypot(dr, dz) : std::abs(dr);
  }

 private:
  Eigen::Vector3d center_, axis_;
  double radius_, half_height_;
};

/// Collection of primitives, raycast and distance-queried as one surface.
class Scene {
 public:
  Scene() = default;

  void add(std::shared_ptr<const SurfacePrimitive> prim) {
    prims_.push_back(std::move(prim));
  }

  template <typename T, typename... Args>
  void emplace(Args&&... args) {
    prims_.push_back(std::make_shared<T>(std::forward<Args>(args)...));
  }

  bool empty() const { return prims_.empty(); }

  std::optional<RayHit> raycast(const Eigen::Vector3d& origin,
                                const Eigen::Vector3d& dir) const {
    std::optional<RayHit> best;
    for (const auto& prim : prims_) {
      const auto hit = prim->raycast(origin, dir);
      if (hit && (!best || hit->t < best->t)) best = hit;
    }
    return best;
  }

  /// Unsigned distance from p to the nearest surface in the scene.
  double distance(const Eigen::Vector3d& p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& prim : prims_) best = std::min(best, prim->distance(p));
    return best;
  }

 private:
  std::vector<std::shared_ptr<const SurfacePrimitive>> prims_;
};

// ---------------------------------------------------------------------------
// Named fixtures. Dimensions are desk scale, matched to a 0.1-4 m sensor.
// ---------------------------------------------------------------------------

/// Single wall in the plane x = 0 spanning |y| <= 6, |z| <= 2; normal +x.
/// The canonical translation-degenerate geometry.
inline Scene flat_wall_scene() {
  Scene s;
  s.emplace<PlanePatch>(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(0, 1, 0),
                        Eigen::Vector3d(0, 0, 1), 6.0, 2.0);
  return s;
}

/// Two parallel walls at x = +/-1 spanning |y| <= 8, |z| <= 1.5, nothing else.
/// All surface normals are +/-x, so motion along the corridor is unobservable.
inline Scene symmetric_canyon_scene() {
  Scene s;
  s.emplace<PlanePatch>(Eigen::Vector3d(-1, 0, 0), Eigen::Vector3d(0, 1, 0),
                        Eigen::Vector3d(0, 0, 1), 8.0, 1.5);
  s.emplace<PlanePatch>(Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0),
                        Eigen::Vector3d(0, 0, 1), 8.0, 1.5);
  return s;
}

/// Three mutually orthogonal unit squares meeting at the origin; normals span
/// +x, +y, +z. Fully constrains the registration problem.
inline Scene corner_scene() {
  Scene s;
  const Eigen::Vector3d half(0.5, 0.5, 0.5);
  s.emplace<PlanePatch>(Eigen::Vector3d(0.5, 0.5, 0), Eigen::Vector3d(1, 0, 0),
                        Eigen::Vector3d(0, 1, 0), 0.5, 0.5);  // floor z=0
  s.emplace<PlanePatch>(Eigen::Vector3d(0, 0.5, 0.5), Eigen::Vector3d(0, 1, 0),
                        Eigen::Vector3d(0, 0, 1), 0.5, 0.5);  // wall x=0
  s.emplace<PlanePatch>(Eigen::Vector3d(0.5, 0, 0.5), Eigen::Vector3d(0, 0, 1),
                        Eigen::Vector3d(1, 0, 0), 0.5, 0.5);  // wall y=0
  return s;
}

/// Rectangular room interior. `furnished` rigs the middle of the room with
/// obstacles the way inspection test rooms are set up: boxes, rotated
/// partition walls and cylinders. The rotated and curved surfaces matter:
/// axis-aligned geometry alone shows a single normal direction whenever the
/// viewing axis lines up with a room axis, which leaves the registration
/// problem unconstrained sideways. All obstacles stay inside a 1 m interior
/// orbit at 0.8 m flight height.
inline Scene room_scene(double width = 3.4, double depth = 2.6,
                        double height = 2.2, bool furnished = true) {
  Scene s;
  s.emplace<Box>(Eigen::Vector3d(-width / 2, -depth / 2, 0.0),
                 Eigen::Vector3d(width / 2, depth / 2, height));
  if (!furnished) return s;

  // Short boxes spread across the whole floor (a 0.8 m flight height clears
  // them) so every viewpoint gets wide lever arms; the central ones sit
  // inside a 1 m interior orbit. x, y, half_x, half_y, height.
  const double boxes[][5] = {
      {0.45, -0.30, 0.15, 0.12, 0.50},  {-0.50, 0.15, 0.12, 0.15, 0.65},
      {0.10, 0.50, 0.15, 0.10, 0.40},   {1.25, 0.75, 0.18, 0.14, 0.45},
      {-1.20, -0.80, 0.16, 0.14, 0.55}, {1.15, -0.85, 0.14, 0.14, 0.35},
      {-1.25, 0.70, 0.15, 0.12, 0.50},  {0.05, -1.00, 0.16, 0.12, 0.40},
  };
  for (const auto& b : boxes) {
    s.emplace<Box>(Eigen::Vector3d(b[0] - b[2], b[1] - b[3], 0.0),
                   Eigen::Vector3d(b[0] + b[2], b[1] + b[3], b[4]));
  }
  // Vertical partition walls at off-axis yaw angles.
  const double partitions[][5] = {
      // x, y, yaw_deg, half_len, height
      {0.35, 0.25, 35.0, 0.35, 0.70},
      {-0.30, -0.40, 115.0, 0.30, 0.60},
      {1.20, 0.45, 100.0, 0.30, 0.85},
      {-1.20, -0.50, 80.0, 0.30, 0.85},
      {0.20, 1.05, 10.0, 0.30, 0.80},
      {-0.15, -1.05, 170.0, 0.30, 0.80},
      {0.90, -0.60, 130.0, 0.28, 0.75},
      {-0.90, 0.60, 50.0, 0.28, 0.75},
      {0.75, 0.85, 145.0, 0.25, 0.70},
      {-0.80, -0.90, 35.0, 0.25, 0.70},
  };
  for (const auto& p : partitions) {
    const double yaw = p[2] * M_PI / 180.0;
    s.emplace<PlanePatch>(Eigen::Vector3d(p[0], p[1], p[4] / 2),
                          Eigen::Vector3d(std::cos(yaw), std::sin(yaw), 0.0),
                          Eigen::Vector3d(0.0, 0.0, 1.0), p[3], p[4] / 2);
  }
  // Leaning boards: normals between horizontal and vertical. Without them
  // (and the slanted cylinder below) every z-constraining surface is exactly
  // horizontal, and a vertical misalignment larger than the correspondence
  // gate censors all of them simultaneously.
  // The tilts form a ladder from near-vertical to near-horizontal: whatever
  // the vertical misalignment, some board's normal-offset stays inside the
  // correspondence gate, so the solver can walk the error down rung by rung.
  const double boards[][6] = {
      // x, y, z_center, yaw_deg, tilt_deg (of the board plane from vertical)
      {0.10, -0.35, 0.35, 70.0, 20.0, 0.30},
      {-0.45, 0.45, 0.30, 160.0, 40.0, 0.25},
      {0.55, 0.25, 0.30, -25.0, 60.0, 0.25},
      {-0.10, 0.55, 0.30, 250.0, 25.0, 0.22},
      {0.45, -0.50, 0.28, 120.0, 50.0, 0.22},
      {-0.85, -0.25, 0.30, 200.0, 30.0, 0.25},
      {0.90, 0.35, 0.28, 80.0, 55.0, 0.22},
      {-0.70, 0.95, 0.26, 300.0, 45.0, 0.22},
      {0.80, -0.95, 0.26, 20.0, 35.0, 0.22},
  };
  for (const auto& b : boards) {
    const double yaw = b[3] * M_PI / 180.0;
    const double tilt = b[4] * M_PI / 180.0;
    const Eigen::Vector3d u(std::cos(yaw), std::sin(yaw), 0.0);
    const Eigen::Vector3d side = u.cross(Eigen::Vector3d::UnitZ());
    const Eigen::Vector3d v =
        std::cos(tilt) * Eigen::Vector3d::UnitZ() + std::sin(tilt) * side;
    s.emplace<PlanePatch>(Eigen::Vector3d(b[0], b[1], b[2]), u, v, b[5], b[5]);
  }
  // Cylinders: visible normals sweep a wide arc from any direction; the
  // slanted ones add a continuous band of vertical components to that fan.
  s.emplace<CylinderSection>(Eigen::Vector3d(0.0, 0.0, 0.275),
                             Eigen::Vector3d(0.0, 0.0, 1.0), 0.18, 0.275);
  s.emplace<CylinderSection>(Eigen::Vector3d(-0.45, -0.35, 0.35),
                             Eigen::Vector3d(0.5, 0.2, 0.84).normalized(), 0.15,
                             0.30);
  s.emplace<CylinderSection>(Eigen::Vector3d(0.40, 0.55, 0.35),
                             Eigen::Vector3d(-0.4, 0.3, 0.87).normalized(),
                             0.14, 0.28);
  s.emplace<CylinderSection>(Eigen::Vector3d(1.10, -0.15, 0.30),
                             Eigen::Vector3d(0.3, -0.45, 0.84).normalized(),
                             0.13, 0.28);
  s.emplace<CylinderSection>(Eigen::Vector3d(-1.05, -0.05, 0.30),
                             Eigen::Vector3d(-0.25, 0.4, 0.88).normalized(),
                             0.13, 0.28);
  return s;
}

/// Floor with scattered boxes and one cylinder; rich, fully constrained.
inline Scene box_field_scene() {
  Scene s;
  s.emplace<PlanePatch>(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0),
                        Eigen::Vector3d(0, 1, 0), 6.0, 6.0);
  const double boxes[][4] = {
      // x, y, yaw-invariant axis-aligned boxes 0.4 x 0.3 x 0.3
      {0.8, 0.5, 0.4, 0.3},  {-0.9, 1.2, 0.4, 0.3}, {1.6, -0.7, 0.3, 0.4},
      {-1.4, -1.1, 0.4, 0.3}, {0.2, 1.8, 0.3, 0.3},  {2.2, 1.1, 0.4, 0.4},
  };
  for (const auto& b : boxes) {
    const Eigen::Vector3d c(b[0], b[1], 0.0);
    const Eigen::Vector3d half(b[2] / 2, b[3] / 2, 0.15);
    s.emplace<Box>(c - Eigen::Vector3d(half.x(), half.y(), 0.0),
                   c + Eigen::Vector3d(half.x(), half.y(), 0.3));
  }
  s.emplace<CylinderSection>(Eigen::Vector3d(-0.3, -1.6, 0.25),
                             Eigen::Vector3d(0, 0, 1), 0.2, 0.25);
  return s;
}

/// Fixture lookup used by the simulator config.
inline Scene make_scene(const std::string& name) {
  if (name == "FLAT_WALL") return flat_wall_scene();
  if (name == "SYMMETRIC_CANYON") return symmetric_canyon_scene();
  if (name == "CORNER") return corner_scene();
  if (name == "ROOM") return room_scene();
  if (name == "BOX_FIELD") return box_field_scene();
  throw BadParams("unknown scene fixture: " + name);
}

}  // namespace gsicp
