// gsicp: geometrically stable ICP with odometry priors
// SPDX-License-Identifier: MIT
//
// Prior-guided overlap extraction between consecutive clouds, overlap
// sufficiency gating, and high-rate frame merging.

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "gsicp/error.hpp"
#include "gsicp/geometry.hpp"
#include "gsicp/kdtree.hpp"
#include "gsicp/point_cloud.hpp"
#include "gsicp/voxel_filter.hpp"

namespace gsicp {

struct OverlapParams {
  // NN membership radius, meters. Must upper-bound the expected prior
  // misalignment: a tighter radius silently drops the surfaces whose normals
  // point along the prior's error, which are exactly the ones the solver
  // needs to correct it.
  double radius = 0.05;
  double min_ratio = 0.30;   // inclusive sufficiency threshold on the ratio
  std::size_t min_points = 100;  // minimum subset size for the sampler
};

/// Overlapping subsets of a consecutive cloud pair. curr_subset_aligned is
/// expressed in the previous frame (already transformed by the prior).
struct OverlapResult {
  PointCloud prev_subset;
  PointCloud curr_subset_aligned;
  double ratio = 0.0;  // |current subset| / |current cloud|, in [0, 1]
};

namespace detail {

inline PointCloud select(const PointCloud& cloud,
                         const std::vector<std::size_t>& indices) {
  PointCloud out;
  out.frame = cloud.frame;
  out.stamp = cloud.stamp;
  out.points.reserve(indices.size());
  const bool with_normals = cloud.has_normals();
  if (with_normals) {
    out.normals.reserve(indices.size());
    out.normal_valid.reserve(indices.size());
  }
  for (std::size_t i : indices) {
    out.points.push_back(cloud.points[i]);
    if (with_normals) {
      out.normals.push_back(cloud.normals[i]);
      out.normal_valid.push_back(cloud.normal_valid[i]);
    }
  }
  return out;
}

}  // namespace detail

/// Extracts the mutually overlapping subsets of the previous and current
/// clouds. `prior` is the relative motion of the current frame expressed in
/// the previous frame, i.e. it maps current-frame coordinates into the
/// previous frame; the current cloud is pre-aligned with it, then membership
/// is decided by nearest-neighbor distance within params.radius on both
/// sides. The ratio is computed over the current cloud.
inline OverlapResult compute_overlap(const PointCloud& prev,
                                     const PointCloud& curr,
                                     const RigidTransform& prior,
                                     const OverlapParams& params,
                                     const SpatialIndex* prev_index = nullptr) {
  if (prev.empty() || curr.empty()) {
    throw EmptyCloud("compute_overlap needs two non-empty clouds");
  }
  const PointCloud aligned = apply(prior, curr, prev.frame);

  std::optional<SpatialIndex> own_index;
  if (prev_index == nullptr) {
    own_index.emplace(prev);
    prev_index = &*own_index;
  }

  std::vector<std::size_t> curr_keep;
  curr_keep.reserve(aligned.size());
  for (std::size_t i = 0; i < aligned.size(); ++i) {
    if (prev_index->nearest(aligned.points[i], params.radius)) {
      curr_keep.push_back(i);
    }
  }

  OverlapResult result;
  result.curr_subset_aligned = detail::select(aligned, curr_keep);
  result.ratio = static_cast<double>(curr_keep.size()) /
                 static_cast<double>(curr.size());

  if (!curr_keep.empty()) {
    const SpatialIndex aligned_index(result.curr_subset_aligned);
    std::vector<std::size_t> prev_keep;
    prev_keep.reserve(prev.size());
    for (std::size_t i = 0; i < prev.size(); ++i) {
      if (aligned_index.nearest(prev.points[i], params.radius)) {
        prev_keep.push_back(i);
      }
    }
    result.prev_subset = detail::select(prev, prev_keep);
  }
  return result;
}

/// True iff the ratio reaches min_ratio (inclusive) and both subsets are
/// large enough for the sampler to work with.
inline bool sufficient_overlap(const OverlapResult& r, const OverlapParams& params) {
  return r.ratio >= params.min_ratio &&
         r.prev_subset.size() >= params.min_points &&
         r.curr_subset_aligned.size() >= params.min_points;
}

/// Merges up to five high-rate frames into one registration cloud: every
/// frame is chained into the first frame's coordinates by its prior,
/// concatenated, and re-voxelized to remove the density bias toward
/// overlapped regions. The output carries the first frame's stamp.
inline PointCloud merge_frames(
    const std::vector<std::pair<PointCloud, RigidTransform>>& frames,
    const VoxelParams& voxel) {
  if (frames.empty()) throw EmptyInput("merge_frames needs at least one frame");
  if (frames.size() > 5) throw BadParams("merge window is limited to 5 frames");

  PointCloud combined;
  combined.frame = frames.front().first.frame;
  combined.stamp = frames.front().first.stamp;
  for (const auto& [cloud, to_first] : frames) {
    append(combined, apply(to_first, cloud));
  }
  PointCloud out = voxel_filter(combined, voxel);
  out.frame = combined.frame;
  out.stamp = combined.stamp;
  return out;
}

}  // namespace gsicp
