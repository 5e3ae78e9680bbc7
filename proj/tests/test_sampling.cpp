#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "gsicp/sampling.hpp"

using namespace gsicp;

namespace {

// Cloud with `n` points whose normals all equal `normal`.
PointCloud plane_cloud(std::size_t n, const Eigen::Vector3d& normal,
                       std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointCloud cloud;
  for (std::size_t i = 0; i < n; ++i) {
    cloud.points.emplace_back(u(rng), u(rng), 0.0);
    cloud.normals.push_back(normal);
    cloud.normal_valid.push_back(1);
  }
  return cloud;
}

// Three orthogonal faces with the given point counts; analytic normals.
PointCloud corner_cloud(std::size_t nx, std::size_t ny, std::size_t nz,
                        std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PointCloud cloud;
  auto add_face = [&](std::size_t n, int axis) {
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::Vector3d p(u(rng), u(rng), u(rng));
      p[axis] = 0.0;
      Eigen::Vector3d normal = Eigen::Vector3d::Zero();
      normal[axis] = 1.0;
      cloud.points.push_back(p);
      cloud.normals.push_back(normal);
      cloud.normal_valid.push_back(1);
    }
  };
  add_face(nx, 0);
  add_face(ny, 1);
  add_face(nz, 2);
  return cloud;
}

}  // namespace

TEST_CASE("normal-space sampling on a single plane") {
  std::mt19937_64 rng(3);
  const PointCloud cloud = plane_cloud(1000, {0, 0, 1}, rng);
  const SampleSet s = sample(cloud, SamplingStrategy::normal_space(1, 200), 200);
  CHECK(s.size() == 200);
  std::set<std::size_t> unique(s.indices.begin(), s.indices.end());
  CHECK(unique.size() == s.size());
}

TEST_CASE("normal-space sampling balances a corner") {
  std::mt19937_64 rng(5);
  // Unequal face populations; equal-area faces in the geometric sense.
  const PointCloud cloud = corner_cloud(700, 500, 300, rng);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const SampleSet s =
        sample(cloud, SamplingStrategy::normal_space(seed, 300), 300);
    REQUIRE(s.size() == 300);
    std::array<int, 3> per_face = {0, 0, 0};
    for (const auto& n : s.normals) {
      for (int a = 0; a < 3; ++a) {
        if (n[a] == 1.0) ++per_face[a];
      }
    }
    for (int a = 0; a < 3; ++a) {
      CHECK(per_face[a] >= 90);
      CHECK(per_face[a] <= 110);
    }
  }
}

TEST_CASE("random sampling is deterministic per seed") {
  std::mt19937_64 rng(7);
  const PointCloud cloud = plane_cloud(500, {0, 0, 1}, rng);
  const SampleSet a = sample(cloud, SamplingStrategy::random(42, 100), 100);
  const SampleSet b = sample(cloud, SamplingStrategy::random(42, 100), 100);
  CHECK(a.indices == b.indices);
  const SampleSet c = sample(cloud, SamplingStrategy::random(43, 100), 100);
  CHECK(a.indices != c.indices);
}

TEST_CASE("normal-space with one bucket equals random sampling") {
  std::mt19937_64 rng(11);
  const PointCloud cloud = corner_cloud(300, 200, 100, rng);
  for (std::uint64_t seed : {1ull, 9ull, 77ull}) {
    const SampleSet ns =
        sample(cloud, SamplingStrategy::normal_space(seed, 150, 1), 150);
    const SampleSet r = sample(cloud, SamplingStrategy::random(seed, 150), 150);
    CHECK(ns.indices == r.indices);
  }
}

TEST_CASE("uniform and all strategies") {
  std::mt19937_64 rng(13);
  const PointCloud cloud = plane_cloud(1000, {0, 0, 1}, rng);

  const SampleSet all = sample(cloud, SamplingStrategy::all(), 1);
  CHECK(all.size() == 1000);

  const SampleSet uni = sample(cloud, SamplingStrategy::uniform(250), 250);
  CHECK(uni.size() == 250);  // stride 4 over 1000
  for (std::size_t i = 1; i < uni.indices.size(); ++i) {
    CHECK(uni.indices[i] - uni.indices[i - 1] == 4);
  }
}

TEST_CASE("sampling skips degenerate normals and never duplicates") {
  std::mt19937_64 rng(17);
  PointCloud cloud = corner_cloud(200, 200, 200, rng);
  // Invalidate a third of the points.
  std::uniform_int_distribution<std::size_t> pick(0, cloud.size() - 1);
  for (int i = 0; i < 200; ++i) cloud.normal_valid[pick(rng)] = 0;

  for (auto strategy :
       {SamplingStrategy::all(), SamplingStrategy::uniform(100),
        SamplingStrategy::random(3, 100),
        SamplingStrategy::normal_space(3, 100)}) {
    const SampleSet s = sample(cloud, strategy, 100);
    std::set<std::size_t> unique(s.indices.begin(), s.indices.end());
    CHECK(unique.size() == s.size());
    for (std::size_t i : s.indices) {
      CHECK(cloud.normal_valid[i] == 1);
    }
  }
}

TEST_CASE("sampling errors") {
  PointCloud no_normals;
  no_normals.points = {{0, 0, 0}};
  CHECK_THROWS_AS(sample(no_normals, SamplingStrategy::random(1, 10), 10),
                  MissingNormals);
  CHECK_THROWS_AS(sample(PointCloud{}, SamplingStrategy::random(1, 10), 10),
                  EmptyCloud);

  std::mt19937_64 rng(19);
  const PointCloud cloud = plane_cloud(100, {0, 0, 1}, rng);
  SamplingStrategy cov;
  cov.kind = SamplingStrategy::Kind::kCovarianceBalanced;
  CHECK_THROWS_AS(sample(cloud, cov, 10), UnsupportedStrategy);
}

TEST_CASE("normal dispersion") {
  SampleSet s;
  s.indices = {0, 1, 2, 3};
  s.points.resize(4, Eigen::Vector3d::Zero());
  s.normals = {{0, 0, 1}, {0, 0, 1}, {0, 0, 1}, {0, 0, 1}};
  CHECK(normal_dispersion(s) == 0.0);

  s.normals = {{1, 0, 0}, {-1, 0, 0}, {1, 0, 0}, {-1, 0, 0}};
  CHECK(normal_dispersion(s) == 1.0);

  CHECK_THROWS_AS(normal_dispersion(SampleSet{}), EmptySample);
}

TEST_CASE("normal-space dispersion beats random on a lopsided corner") {
  std::mt19937_64 rng(23);
  const PointCloud cloud = corner_cloud(2000, 1000, 400, rng);
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const double ns = normal_dispersion(
        sample(cloud, SamplingStrategy::normal_space(seed, 300), 300));
    const double r = normal_dispersion(
        sample(cloud, SamplingStrategy::random(seed, 300), 300));
    if (ns >= r) ++wins;
  }
  CHECK(wins >= 90);
}
