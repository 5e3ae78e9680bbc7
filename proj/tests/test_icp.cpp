#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gsicp/icp.hpp"
#include "helpers.hpp"

using namespace gsicp;
using test_helpers::corner_grid;
using test_helpers::plane_grid;

namespace {

CorrespondenceSet exact_pairs(const PointCloud& target,
                              const RigidTransform& source_from_target) {
  // Source points displaced away from the target by a known transform, with
  // perfect correspondences (no matching step involved).
  CorrespondenceSet set;
  for (std::size_t i = 0; i < target.size(); ++i) {
    Correspondence c;
    c.source_index = i;
    c.target_index = i;
    c.source_point = source_from_target * target.points[i];
    c.target_point = target.points[i];
    c.target_normal = target.normals[i];
    c.squared_distance = (c.source_point - c.target_point).squaredNorm();
    set.pairs.push_back(c);
  }
  return set;
}

}  // namespace

TEST_CASE("match on aligned identical clouds") {
  const PointCloud cloud = corner_grid();
  const SpatialIndex index(cloud);
  const SampleSet s = sample(cloud, SamplingStrategy::all(), 0);
  const CorrespondenceSet set = match(s, cloud, index, 0.01);
  REQUIRE(set.size() == s.size());
  for (const auto& pair : set.pairs) {
    CHECK(pair.squared_distance == 0.0);
    CHECK(pair.source_point == pair.target_point);
  }
}

TEST_CASE("match throws when everything is out of range") {
  PointCloud target;  // sparse grid, 0.1 m pitch
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      target.points.emplace_back(0.1 * i, 0.1 * j, 0.0);
      target.normals.emplace_back(0.0, 0.0, 1.0);
      target.normal_valid.push_back(1);
    }
  const SpatialIndex index(target);

  SampleSet s;
  for (std::size_t i = 0; i < target.size(); ++i) {
    s.indices.push_back(i);
    s.points.push_back(target.points[i] + Eigen::Vector3d(0.02, 0, 0));
    s.normals.push_back(target.normals[i]);
  }
  CHECK_THROWS_AS(match(s, target, index, 0.01), NoCorrespondences);
}

TEST_CASE("match on an in-plane shifted plane") {
  const PointCloud target = plane_grid(30, 0.01);
  const SpatialIndex index(target);
  SampleSet s;
  for (std::size_t i = 0; i < target.size(); ++i) {
    s.indices.push_back(i);
    s.points.push_back(target.points[i] + Eigen::Vector3d(0.005, 0, 0));
    s.normals.push_back(target.normals[i]);
  }
  const CorrespondenceSet set = match(s, target, index, 0.01);
  // Every shifted point sits exactly between two grid nodes.
  CHECK(set.size() == s.size());
  for (const auto& pair : set.pairs) {
    CHECK(std::sqrt(pair.squared_distance) <= 0.005 + 1e-12);
    CHECK(pair.target_normal == Eigen::Vector3d(0, 0, 1));
  }
}

TEST_CASE("ransac rejection") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const RigidTransform truth(
      Eigen::Quaterniond(Eigen::AngleAxisd(0.3, Eigen::Vector3d(1, 2, 3).normalized())),
      Eigen::Vector3d(0.4, -0.2, 0.1));

  CorrespondenceSet set;
  for (int i = 0; i < 200; ++i) {
    Correspondence c;
    c.source_index = c.target_index = static_cast<std::size_t>(i);
    c.source_point = Eigen::Vector3d(u(rng), u(rng), u(rng));
    c.target_point = truth * c.source_point;
    c.target_normal = Eigen::Vector3d(0, 0, 1);
    set.pairs.push_back(c);
  }

  SECTION("all inliers come back unchanged") {
    const CorrespondenceSet out = reject_outliers(set, 0.01, 17);
    REQUIRE(out.size() == set.size());
    CHECK_FALSE(out.ransac_bypassed);
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out.pairs[i].source_index == set.pairs[i].source_index);
    }
  }

  SECTION("planted outliers are removed, inliers kept") {
    CorrespondenceSet corrupted = set;
    std::vector<std::size_t> planted;
    for (int k = 0; k < 20; ++k) {
      const std::size_t i = 10 * k;
      planted.push_back(i);
      corrupted.pairs[i].target_point += Eigen::Vector3d(
          0.5 + u(rng), 0.5 + u(rng), 0.5 + u(rng));
    }
    const CorrespondenceSet out = reject_outliers(corrupted, 0.01, 17);
    CHECK(out.size() == set.size() - planted.size());
    for (const auto& pair : out.pairs) {
      CHECK(std::find(planted.begin(), planted.end(), pair.source_index) ==
            planted.end());
    }
  }

  SECTION("minimal sets pass through") {
    CorrespondenceSet three;
    three.pairs = {set.pairs[0], set.pairs[1], set.pairs[2]};
    const CorrespondenceSet out = reject_outliers(three, 0.01, 17);
    CHECK(out.size() == 3);
  }

  SECTION("deterministic under seed") {
    CorrespondenceSet corrupted = set;
    for (int k = 0; k < 30; ++k) {
      corrupted.pairs[3 * k].target_point += Eigen::Vector3d(1, 1, 1);
    }
    const CorrespondenceSet a = reject_outliers(corrupted, 0.01, 5);
    const CorrespondenceSet b = reject_outliers(corrupted, 0.01, 5);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.pairs[i].source_index == b.pairs[i].source_index);
    }
  }

  SECTION("never removes more than 80 percent") {
    // Scatter almost everything: no hypothesis keeps >= 20%, so the set is
    // returned unchanged and flagged.
    CorrespondenceSet scattered = set;
    for (std::size_t i = 0; i < scattered.size(); ++i) {
      if (i % 10 != 0) {
        scattered.pairs[i].target_point +=
            Eigen::Vector3d(u(rng) * 2.0 + 0.2, u(rng) * 2.0 + 0.2, u(rng));
      }
    }
    const CorrespondenceSet out = reject_outliers(scattered, 0.01, 23);
    CHECK(out.size() == scattered.size());
    CHECK(out.ransac_bypassed);
  }
}

TEST_CASE("point-to-plane solve") {
  const PointCloud corner = corner_grid();

  SECTION("zero displacement gives the zero twist") {
    const CorrespondenceSet set = exact_pairs(corner, RigidTransform());
    const TwistDelta x = solve_point_to_plane(set);
    CHECK(x.rot.norm() == 0.0);
    CHECK(x.trans.norm() == 0.0);
    CHECK(mean_sq_residual(set, RigidTransform()) == 0.0);
  }

  SECTION("recovers a small translation") {
    const Eigen::Vector3d d(0.002, -0.001, 0.003);
    const CorrespondenceSet set =
        exact_pairs(corner, RigidTransform::from_translation(d));
    const TwistDelta x = solve_point_to_plane(set);
    CHECK(x.rot.norm() < 1e-6);
    CHECK((x.trans + d).norm() < 1e-6);  // solve moves source onto target
  }

  SECTION("recovers a small rotation within linearization error") {
    const double theta = 0.01;
    const RigidTransform rz(
        Eigen::Quaterniond(Eigen::AngleAxisd(-theta, Eigen::Vector3d::UnitZ())),
        Eigen::Vector3d::Zero());
    const CorrespondenceSet set = exact_pairs(corner, rz);
    const TwistDelta x = solve_point_to_plane(set);
    CHECK((x.rot - Eigen::Vector3d(0, 0, theta)).norm() < 1e-5);
    CHECK(x.trans.norm() < 1e-4);
  }

  SECTION("solved step never increases the linearized residual") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int round = 0; round < 20; ++round) {
      Eigen::Vector3d axis(gauss(rng), gauss(rng), gauss(rng));
      axis.normalize();
      const RigidTransform d(
          Eigen::Quaterniond(Eigen::AngleAxisd(0.02 * gauss(rng), axis)),
          0.01 * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng)));
      const CorrespondenceSet set = exact_pairs(corner, d);
      const TwistDelta x = solve_point_to_plane(set);
      const double before = mean_sq_residual(set, RigidTransform());
      const double after = mean_sq_residual(set, exp_small(x));
      CHECK(after <= before + 1e-15);
    }
  }

  SECTION("plane-only correspondences are rank deficient") {
    const PointCloud plane = plane_grid();
    const CorrespondenceSet set =
        exact_pairs(plane, RigidTransform::from_translation({0.001, 0, 0.002}));
    CHECK_THROWS_AS(solve_point_to_plane(set), RankDeficient);
  }

  SECTION("too few pairs") {
    CorrespondenceSet tiny;
    tiny.pairs.resize(5);
    CHECK_THROWS_AS(solve_point_to_plane(tiny), RankDeficient);
  }
}

TEST_CASE("icp_register") {
  const PointCloud target = corner_grid(32);
  const SpatialIndex index(target);
  const SamplingStrategy strategy = SamplingStrategy::normal_space(3, 500);
  const IcpParams params;

  SECTION("exact alignment converges immediately") {
    const RegistrationResult r =
        icp_register(target, target, index, strategy, params);
    CHECK(r.iterations == 1);
    CHECK(r.converged_by == ConvergedBy::kTransformEps);
    CHECK(r.fitness == 0.0);
    const PoseError e = pose_error(r.transform, RigidTransform());
    CHECK(e.translation == 0.0);
    CHECK(e.rotation == 0.0);
    CHECK(r.provenance == Provenance::kIcp);
  }

  SECTION("perfect prior needs no refinement") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const RigidTransform motion(
        Eigen::Quaterniond(gauss(rng), gauss(rng), gauss(rng), gauss(rng)),
        Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng)));
    // The pipeline aligns the current cloud with the prior before calling
    // the solver; with a perfect prior the aligned source equals the target.
    const PointCloud curr = apply(invert(motion), target);
    const PointCloud aligned = apply(motion, curr);
    const RegistrationResult r =
        icp_register(aligned, target, index, strategy, params);
    const PoseError e = pose_error(r.transform, RigidTransform());
    CHECK(e.translation < 1e-6);
    CHECK(e.rotation < 1e-6);
  }

  SECTION("recovers a residual prior error") {
    const TwistDelta residual(Eigen::Vector3d(0.0, 0.002, -0.003),
                              Eigen::Vector3d(0.004, -0.002, 0.001));
    const RigidTransform d = exp_small(residual);
    const PointCloud source = apply(d, target);
    const RegistrationResult r =
        icp_register(source, target, index, strategy, params);
    // The refinement must undo the displacement.
    const PoseError e = pose_error(r.transform, invert(d));
    CHECK(e.translation < 5e-4);
    CHECK(e.rotation < 1e-3);
    CHECK(r.fitness < 1e-7);
  }

  SECTION("bit-identical results under fixed seeds") {
    const PointCloud source =
        apply(RigidTransform::from_translation({0.003, 0.001, -0.002}), target);
    const RegistrationResult a =
        icp_register(source, target, index, strategy, params);
    const RegistrationResult b =
        icp_register(source, target, index, strategy, params);
    CHECK(a.transform.rotation.coeffs() == b.transform.rotation.coeffs());
    CHECK(a.transform.translation == b.transform.translation);
    CHECK(a.iterations == b.iterations);
    CHECK(a.fitness == b.fitness);
  }
}
