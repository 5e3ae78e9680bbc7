// gsicp: geometrically stable ICP with odometry priors
// SPDX-License-Identifier: MIT
//
// Point selection strategies for the registration step. Normal-space
// sampling spreads the picked points over the unit sphere of normals so the
// constraint directions are as diverse as the geometry allows.

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "gsicp/error.hpp"
#include "gsicp/point_cloud.hpp"

namespace gsicp {

struct SamplingStrategy {
  enum class Kind {
    kAll,
    kUniform,
    kRandom,
    kNormalSpace,
    // Constraint-covariance balancing selection. Deliberately not
    // implemented: evaluated against normal-space sampling and dropped.
    kCovarianceBalanced,
  };

  Kind kind = Kind::kNormalSpace;
  std::uint64_t seed = 0;
  int buckets_per_axis = 8;  // angular bins per sphere axis (normal-space)
  std::size_t count = 500;   // sample size n

  static SamplingStrategy all() { return {Kind::kAll, 0, 8, 0}; }
  static SamplingStrategy uniform(std::size_t n) { return {Kind::kUniform, 0, 8, n}; }
  static SamplingStrategy random(std::uint64_t seed, std::size_t n) {
    return {Kind::kRandom, seed, 8, n};
  }
  static SamplingStrategy normal_space(std::uint64_t seed, std::size_t n,
                                       int buckets = 8) {
    return {Kind::kNormalSpace, seed, buckets, n};
  }
};

/// Selected points with their (unit) normals, resolved from the source cloud.
struct SampleSet {
  std::vector<std::size_t> indices;
  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3d> normals;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
};

namespace detail {

inline SampleSet resolve(const PointCloud& cloud,
                         std::vector<std::size_t> indices) {
  SampleSet s;
  s.points.reserve(indices.size());
  s.normals.reserve(indices.size());
  for (std::size_t i : indices) {
    s.points.push_back(cloud.points[i]);
    s.normals.push_back(cloud.normals[i]);
  }
  s.indices = std::move(indices);
  return s;
}

/// Equal-area bin over (azimuth, cos inclination) for a unit normal.
inline std::size_t normal_bucket(const Eigen::Vector3d& n, int buckets) {
  const double az = std::atan2(n.y(), n.x());  // (-pi, pi]
  const double cz = std::clamp(n.z(), -1.0, 1.0);
  const int a = std::clamp(
      static_cast<int>((az + M_PI) / (2.0 * M_PI) * buckets), 0, buckets - 1);
  const int i = std::clamp(static_cast<int>((cz + 1.0) / 2.0 * buckets), 0,
                           buckets - 1);
  return static_cast<std::size_t>(i) * buckets + a;
}

}  // namespace detail

/// Selects up to n points with valid normals. All strategies are pure under a
/// fixed seed; points flagged with degenerate normals are never selected.
inline SampleSet sample(const PointCloud& cloud, const SamplingStrategy& strategy,
                        std::size_t n) {
  if (cloud.empty()) throw EmptyCloud("cannot sample an empty cloud");
  if (!cloud.has_normals()) {
    throw MissingNormals("sampling requires a cloud with normals");
  }
  if (strategy.kind == SamplingStrategy::Kind::kCovarianceBalanced) {
    throw UnsupportedStrategy(
        "covariance-balanced selection is not implemented");
  }
  if (n < 1 && strategy.kind != SamplingStrategy::Kind::kAll) {
    throw BadParams("sample size must be >= 1");
  }

  std::vector<std::size_t> valid;
  valid.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.normal_valid[i]) valid.push_back(i);
  }

  switch (strategy.kind) {
    case SamplingStrategy::Kind::kAll:
      return detail::resolve(cloud, std::move(valid));

    case SamplingStrategy::Kind::kUniform: {
      const std::size_t stride =
          std::max<std::size_t>(1, (valid.size() + n - 1) / n);
      std::vector<std::size_t> picked;
      for (std::size_t i = 0; i < valid.size(); i += stride) {
        picked.push_back(valid[i]);
      }
      return detail::resolve(cloud, std::move(picked));
    }

    case SamplingStrategy::Kind::kRandom: {
      std::mt19937_64 rng(strategy.seed);
      std::shuffle(valid.begin(), valid.end(), rng);
      if (valid.size() > n) valid.resize(n);
      return detail::resolve(cloud, std::move(valid));
    }

    case SamplingStrategy::Kind::kNormalSpace: {
      if (strategy.buckets_per_axis < 1) {
        throw BadParams("buckets_per_axis must be >= 1");
      }
      const int b = strategy.buckets_per_axis;
      std::vector<std::vector<std::size_t>> buckets(
          static_cast<std::size_t>(b) * b);
      for (std::size_t i : valid) {
        buckets[detail::normal_bucket(cloud.normals[i], b)].push_back(i);
      }
      // One shared RNG stream, consumed in bucket order: with a single
      // bucket this degenerates exactly to random sampling with the same
      // seed.
      std::mt19937_64 rng(strategy.seed);
      for (auto& bucket : buckets) std::shuffle(bucket.begin(), bucket.end(), rng);

      std::vector<std::size_t> picked;
      picked.reserve(std::min(n, valid.size()));
      std::size_t round = 0;
      bool drew = true;
      while (picked.size() < std::min(n, valid.size()) && drew) {
        drew = false;
        for (const auto& bucket : buckets) {
          if (round < bucket.size()) {
            picked.push_back(bucket[round]);
            drew = true;
            if (picked.size() == std::min(n, valid.size())) break;
          }
        }
        ++round;
      }
      return detail::resolve(cloud, std::move(picked));
    }

    case SamplingStrategy::Kind::kCovarianceBalanced:
      break;  // unreachable, rejected above
  }
  throw UnsupportedStrategy("unknown sampling strategy");
}

/// 1 - |mean of unit normals|: 0 when all normals agree, toward 1 for an
/// isotropic spread. Used to quantify how well a sample spans normal space.
inline double normal_dispersion(const SampleSet& s) {
  if (s.empty()) throw EmptySample("normal_dispersion of an empty sample");
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& n : s.normals) mean += n;
  mean /= static_cast<double>(s.normals.size());
  return 1.0 - mean.norm();
}

}  // namespace gsicp
