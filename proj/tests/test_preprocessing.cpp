#include <catch2/catch_amalgamated.hpp>

#include <limits>
#include <map>
#include <random>

#include "gsicp/kdtree.hpp"
#include "gsicp/normal_estimation.hpp"
#include "gsicp/voxel_filter.hpp"

using namespace gsicp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PointCloud random_cloud(std::size_t n, std::mt19937_64& rng, double extent = 1.0) {
  std::uniform_real_distribution<double> u(0.0, extent);
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    cloud.points.emplace_back(u(rng), u(rng), u(rng));
  }
  return cloud;
}

// O(n^2) oracle for nearest-neighbor queries.
std::pair<std::size_t, double> brute_nearest(const PointCloud& cloud,
                                             const Eigen::Vector3d& q) {
  std::size_t best = 0;
  double best_sq = kInf;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double d = (cloud.points[i] - q).squaredNorm();
    if (d < best_sq) {
      best_sq = d;
      best = i;
    }
  }
  return {best, std::sqrt(best_sq)};
}

// Independent voxel-hash oracle: per-cell centroid via an ordered map.
std::map<std::array<std::int64_t, 3>, std::pair<Eigen::Vector3d, int>>
brute_voxel(const PointCloud& cloud, double leaf) {
  std::map<std::array<std::int64_t, 3>, std::pair<Eigen::Vector3d, int>> cells;
  for (const auto& p : cloud.points) {
    std::array<std::int64_t, 3> key = {
        static_cast<std::int64_t>(std::floor(p.x() / leaf)),
        static_cast<std::int64_t>(std::floor(p.y() / leaf)),
        static_cast<std::int64_t>(std::floor(p.z() / leaf))};
    auto& [sum, count] = cells[key];
    if (count == 0) sum = Eigen::Vector3d::Zero();
    sum += p;
    count += 1;
  }
  return cells;
}

}  // namespace

TEST_CASE("voxel filter centroids") {
  SECTION("corners of a tiny cube collapse to its center") {
    PointCloud cloud;
    const double h = 0.0005;  // 1 mm cube around (0.005, 0.005, 0.005)
    const Eigen::Vector3d c(0.005, 0.005, 0.005);
    for (int dx : {-1, 1})
      for (int dy : {-1, 1})
        for (int dz : {-1, 1})
          cloud.points.push_back(c + h * Eigen::Vector3d(dx, dy, dz));
    const PointCloud out = voxel_filter(cloud, {0.01});
    REQUIRE(out.size() == 1);
    CHECK((out.points[0] - c).norm() < 1e-15);
  }

  SECTION("well separated grid points are kept") {
    PointCloud cloud;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) cloud.points.emplace_back(0.02 * i, 0.02 * j, 0.0);
    const PointCloud out = voxel_filter(cloud, {0.01});
    CHECK(out.size() == cloud.size());
  }

  SECTION("matches the brute-force voxel hash oracle") {
    std::mt19937_64 rng(101);
    const PointCloud cloud = random_cloud(10000, rng);
    const double leaf = 0.1;
    const PointCloud out = voxel_filter(cloud, {leaf});
    const auto oracle = brute_voxel(cloud, leaf);
    REQUIRE(out.size() == oracle.size());
    CHECK(out.size() <= 1000);
    // Output is ordered by voxel key, as is the std::map oracle.
    std::size_t i = 0;
    for (const auto& [key, cell] : oracle) {
      const Eigen::Vector3d centroid = cell.first / cell.second;
      CHECK((out.points[i] - centroid).norm() < 1e-12);
      ++i;
    }
  }

  SECTION("empty input, empty output") {
    CHECK(voxel_filter(PointCloud{}, {0.01}).empty());
  }

  SECTION("idempotent") {
    std::mt19937_64 rng(103);
    const PointCloud cloud = random_cloud(5000, rng);
    const PointCloud once = voxel_filter(cloud, {0.07});
    const PointCloud twice = voxel_filter(once, {0.07});
    REQUIRE(once.size() == twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
      CHECK(once.points[i] == twice.points[i]);
    }
  }

  SECTION("rejects non-positive leaf") {
    CHECK_THROWS_AS(voxel_filter(PointCloud{}, {0.0}), BadParams);
  }
}

TEST_CASE("spatial index") {
  SECTION("single point") {
    PointCloud cloud;
    cloud.points = {{0.5, 0.5, 0.5}};
    const SpatialIndex index(cloud);
    const auto hit = index.nearest({10, 10, 10}, kInf);
    REQUIRE(hit.has_value());
    CHECK(hit->first == 0);
  }

  SECTION("grid node queries return distance zero") {
    PointCloud cloud;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) cloud.points.emplace_back(i, j, k);
    const SpatialIndex index(cloud);
    const auto hit = index.nearest({2, 3, 1}, kInf);
    REQUIRE(hit.has_value());
    CHECK(hit->second == 0.0);
    CHECK(cloud.points[hit->first] == Eigen::Vector3d(2, 3, 1));
  }

  SECTION("d_max gates the result") {
    PointCloud cloud;
    cloud.points = {{0, 0, 0}};
    const SpatialIndex index(cloud);
    CHECK_FALSE(index.nearest({0.02, 0, 0}, 0.01).has_value());
    CHECK(index.nearest({0.02, 0, 0}, 0.021).has_value());
  }

  SECTION("matches brute force on random clouds") {
    std::mt19937_64 rng(107);
    for (int round = 0; round < 3; ++round) {
      const PointCloud cloud = random_cloud(2000, rng);
      const SpatialIndex index(cloud);
      std::uniform_real_distribution<double> u(-0.2, 1.2);
      for (int qi = 0; qi < 500; ++qi) {
        const Eigen::Vector3d q(u(rng), u(rng), u(rng));
        const auto hit = index.nearest(q, kInf);
        const auto [bi, bd] = brute_nearest(cloud, q);
        REQUIRE(hit.has_value());
        CHECK(hit->second == Catch::Approx(bd).margin(1e-14));
        // Equidistant points are legitimate ties; compare distances.
        CHECK((cloud.points[hit->first] - q).norm() ==
              Catch::Approx(bd).margin(1e-14));
        // Radius-limited query agrees with the thresholded oracle.
        const double r = 0.05 + 0.1 * qi / 500.0;
        const auto capped = index.nearest(q, r);
        if (bd <= r) {
          REQUIRE(capped.has_value());
          CHECK(capped->second == Catch::Approx(bd).margin(1e-14));
        } else {
          CHECK_FALSE(capped.has_value());
        }
      }
    }
  }

  SECTION("knn matches brute force") {
    std::mt19937_64 rng(109);
    const PointCloud cloud = random_cloud(500, rng);
    const SpatialIndex index(cloud);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::size_t> nn;
    for (int qi = 0; qi < 100; ++qi) {
      const Eigen::Vector3d q(u(rng), u(rng), u(rng));
      index.knn(q, 10, nn);
      REQUIRE(nn.size() == 10);
      std::vector<double> dists;
      for (const auto& p : cloud.points) dists.push_back((p - q).norm());
      std::vector<double> sorted = dists;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t j = 0; j < nn.size(); ++j) {
        CHECK(dists[nn[j]] == Catch::Approx(sorted[j]).margin(1e-14));
      }
    }
  }

  SECTION("empty cloud is rejected") {
    CHECK_THROWS_AS(SpatialIndex(PointCloud{}), EmptyCloud);
  }
}

TEST_CASE("normal estimation") {
  SECTION("planar grid gives the plane normal") {
    PointCloud cloud;
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) cloud.points.emplace_back(0.01 * i, 0.01 * j, 0.0);
    const PointCloud out = estimate_normals(cloud, 10, {0.1, 0.1, 1.0});
    REQUIRE(out.has_normals());
    for (std::size_t i = 0; i < out.size(); ++i) {
      REQUIRE(out.normal_valid[i] == 1);
      CHECK((out.normals[i] - Eigen::Vector3d(0, 0, 1)).norm() < 1e-6);
    }
  }

  SECTION("sphere normals point toward an interior viewpoint") {
    PointCloud cloud;
    std::mt19937_64 rng(113);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
      Eigen::Vector3d p(gauss(rng), gauss(rng), gauss(rng));
      cloud.points.push_back(p.normalized());
    }
    const PointCloud out = estimate_normals(cloud, 10, Eigen::Vector3d::Zero());
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!out.normal_valid[i]) continue;
      CHECK(out.normals[i].dot(out.points[i]) < 0.0);
      CHECK(std::abs(out.normals[i].norm() - 1.0) < 1e-9);
    }
  }

  SECTION("two perpendicular planes, away from the crease") {
    PointCloud cloud;
    const double step = 0.01;
    for (int i = 0; i <= 50; ++i) {
      for (int j = 0; j <= 50; ++j) {
        cloud.points.emplace_back(step * i, step * j, 0.0);   // floor, n = +z
        cloud.points.emplace_back(step * i, 0.0, step * j);   // wall,  n = +y
      }
    }
    const Eigen::Vector3d viewpoint(0.25, 0.5, 0.5);
    const PointCloud out = estimate_normals(cloud, 10, viewpoint);
    const double crease_margin = 2 * step;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const Eigen::Vector3d& p = out.points[i];
      if (p.y() < crease_margin && p.z() < crease_margin) continue;
      REQUIRE(out.normal_valid[i] == 1);
      const Eigen::Vector3d expected =
          p.z() == 0.0 ? Eigen::Vector3d(0, 0, 1) : Eigen::Vector3d(0, 1, 0);
      const double angle =
          std::acos(std::clamp(out.normals[i].dot(expected), -1.0, 1.0));
      CHECK(angle < 5.0 * M_PI / 180.0);
    }
  }

  SECTION("collinear neighborhoods are flagged invalid") {
    PointCloud cloud;
    for (int i = 0; i < 30; ++i) cloud.points.emplace_back(0.01 * i, 0.0, 0.0);
    const PointCloud out = estimate_normals(cloud, 5, {0, 0, 1});
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out.normal_valid[i] == 0);
    }
  }

  SECTION("viewpoint sign convention holds everywhere") {
    std::mt19937_64 rng(127);
    const PointCloud cloud = random_cloud(1000, rng);
    const Eigen::Vector3d viewpoint(0.5, 0.5, 5.0);
    const PointCloud out = estimate_normals(cloud, 10, viewpoint);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!out.normal_valid[i]) continue;
      CHECK(out.normals[i].dot(viewpoint - out.points[i]) >= 0.0);
      CHECK(std::abs(out.normals[i].norm() - 1.0) < 1e-9);
    }
  }

  SECTION("too few points") {
    PointCloud cloud;
    cloud.points = {{0, 0, 0}, {1, 0, 0}};
    CHECK_THROWS_AS(estimate_normals(cloud, 10, {0, 0, 1}), TooFewPoints);
  }
}
