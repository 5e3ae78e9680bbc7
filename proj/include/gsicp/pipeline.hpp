// gsicp: geometrically stable ICP with odometry priors
// SPDX-License-Identifier: MIT
//
// Per-frame cascade: compose the odometry prior with the sensor extrinsics,
// noise-filter, estimate normals, merge the high-rate window, check overlap,
// gate on geometric stability, then either refine with ICP or fall back to
// the prior. Accumulates the trajectory and a voxel-deduplicated global map.

#pragma once

#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "gsicp/error.hpp"
#include "gsicp/geometry.hpp"
#include "gsicp/icp.hpp"
#include "gsicp/kdtree.hpp"
#include "gsicp/normal_estimation.hpp"
#include "gsicp/overlap.hpp"
#include "gsicp/sampling.hpp"
#include "gsicp/stability.hpp"
#include "gsicp/voxel_filter.hpp"

namespace gsicp {

struct PipelineConfig {
  RigidTransform extrinsics;  // maps VI-frame coordinates to the depth frame
  VoxelParams voxel;
  OverlapParams overlap;
  SamplingStrategy sampling;
  double c_thres = 15.0;
  IcpParams icp;
  int merge_window = 1;  // 1..5 frames merged into each registration cloud
  bool gate_enabled = true;
  std::size_t normal_k = 10;

  void validate() const {
    if (!(c_thres >= 1.0)) throw BadParams("c_thres must be >= 1");
    if (merge_window < 1 || merge_window > 5) {
      throw BadParams("merge_window must be in [1, 5]");
    }
    if (!(voxel.leaf > 0.0)) throw BadParams("voxel leaf must be > 0");
    if (normal_k < 3) throw BadParams("normal_k must be >= 3");
  }
};

/// Per-frame audit record. PRIOR_* frames carry no ICP fitness; the overlap
/// and stability fields are filled only up to the stage the cascade reached.
struct FrameLog {
  double stamp = 0.0;
  double overlap_ratio = -1.0;  // < 0 when overlap was not evaluated
  bool stability_evaluated = false;
  Vector6 eigenvalues = Vector6::Zero();
  double condition_number = std::numeric_limits<double>::quiet_NaN();
  bool stable = false;
  Provenance provenance = Provenance::kInit;
  double fitness = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double elapsed = 0.0;           // full frame processing time, seconds
  RigidTransform relative;        // pose delta applied by this frame
};

/// Session state. Must be advanced sequentially per session; independent
/// sessions are independent objects.
class PipelineState {
 public:
  explicit PipelineState(const PipelineConfig& cfg) : map_(cfg.voxel.leaf) {
    cfg.validate();
  }

  bool initialized() const { return initialized_; }
  const RigidTransform& pose() const { return pose_; }
  const std::vector<Pose>& trajectory() const { return trajectory_; }
  const PointCloud& last_cloud() const { return last_cloud_; }

  /// Materializes the voxel-deduplicated global map (ordered by voxel key).
  PointCloud map() const { return map_.extract(); }

 private:
  friend FrameLog process_frame(PipelineState&, const PointCloud&,
                                const RigidTransform&, const PipelineConfig&);

  bool initialized_ = false;
  double last_stamp_ = -std::numeric_limits<double>::infinity();
  PointCloud last_cloud_;
  std::optional<SpatialIndex> last_index_;
  RigidTransform pose_;
  std::vector<Pose> trajectory_;
  VoxelGridAccumulator map_;
  // Prior accumulated across frames whose clouds were unusable, mapping the
  // current frame into the frame of last_cloud_. Kept as an explicit
  // identity flag so ordinary frames hand the prior through untouched.
  RigidTransform carry_;
  bool carry_is_identity_ = true;
  // Recent single-frame clouds for window merging, with transforms into the
  // most recently processed frame.
  std::deque<std::pair<PointCloud, RigidTransform>> merge_buffer_;
};

/// Relative VI motion conjugated into the depth-sensor frame:
/// extrinsics * vi_rel * extrinsics^-1. A relative motion changes frames by
/// conjugation, not by a one-sided product.
inline RigidTransform prior_from_vi(const RigidTransform& vi_rel,
                                    const RigidTransform& extrinsics) {
  return compose(extrinsics, compose(vi_rel, invert(extrinsics)));
}

/// One point per occupied voxel after folding `cloud` (posed into the map
/// frame) into `map`. Idempotent for repeated identical inputs.
inline PointCloud accumulate_map(const PointCloud& map, const PointCloud& cloud,
                                 const RigidTransform& pose,
                                 const VoxelParams& voxel) {
  PointCloud combined = map;
  append(combined, apply(pose, cloud));
  PointCloud out = voxel_filter(combined, voxel);
  out.frame = map.frame;
  return out;
}

/// Advances one frame: returns the audit log and mutates the state (pose,
/// trajectory, map, merge window). `vi_prior` is the relative VI motion from
/// the previous to the current frame, expressed in the VI frame; it is
/// ignored for the first frame of a session.
inline FrameLog process_frame(PipelineState& state, const PointCloud& cloud,
                              const RigidTransform& vi_prior,
                              const PipelineConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  const auto finish = [&t_start](FrameLog& log) {
    log.elapsed = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t_start)
                      .count();
  };

  if (state.initialized_ && !(cloud.stamp > state.last_stamp_)) {
    throw NonMonotonicTimestamp("frame stamp " + std::to_string(cloud.stamp) +
                                " does not advance past " +
                                std::to_string(state.last_stamp_));
  }

  FrameLog log;
  log.stamp = cloud.stamp;

  const RigidTransform prior =
      state.initialized_ ? prior_from_vi(vi_prior, cfg.extrinsics)
                         : RigidTransform();

  // Re-base the merge window onto the incoming frame.
  if (state.initialized_) {
    for (auto& entry : state.merge_buffer_) {
      entry.second = compose(invert(prior), entry.second);
    }
  }

  const PointCloud filtered = voxel_filter(cloud, cfg.voxel);
  const bool usable = filtered.size() >= std::max<std::size_t>(cfg.normal_k, 6);

  PointCloud reg_cloud;
  if (usable) {
    PointCloud with_normals =
        estimate_normals(filtered, cfg.normal_k, Eigen::Vector3d::Zero());
    if (cfg.merge_window > 1) {
      std::vector<std::pair<PointCloud, RigidTransform>> frames;
      frames.emplace_back(with_normals, RigidTransform());
      for (const auto& entry : state.merge_buffer_) frames.push_back(entry);
      reg_cloud = merge_frames(frames, cfg.voxel);
      state.merge_buffer_.emplace_front(std::move(with_normals),
                                        RigidTransform());
      const auto keep = static_cast<std::size_t>(cfg.merge_window - 1);
      while (state.merge_buffer_.size() > keep) state.merge_buffer_.pop_back();
    } else {
      reg_cloud = std::move(with_normals);
    }
  }

  if (!state.initialized_) {
    // Session start: the first usable cloud seeds the map at the origin.
    state.pose_ = RigidTransform();
    if (usable) {
      state.map_.add(reg_cloud);
      state.last_cloud_ = std::move(reg_cloud);
      state.last_index_.emplace(state.last_cloud_);
      state.initialized_ = true;
    }
    state.trajectory_.push_back({cloud.stamp, state.pose_});
    state.last_stamp_ = cloud.stamp;
    log.provenance = Provenance::kInit;
    finish(log);
    return log;
  }

  // Prior mapping the current frame into the frame of the stored reference
  // cloud (identical to `prior` unless unusable frames were skipped).
  const RigidTransform effective_prior =
      state.carry_is_identity_ ? prior : compose(state.carry_, prior);

  RigidTransform relative = effective_prior;
  if (!usable) {
    log.provenance = Provenance::kPriorLowOverlap;
    log.overlap_ratio = 0.0;
    state.carry_ = effective_prior;
    state.carry_is_identity_ = false;
  } else {
    const OverlapResult overlap =
        compute_overlap(state.last_cloud_, reg_cloud, effective_prior,
                        cfg.overlap, &*state.last_index_);
    log.overlap_ratio = overlap.ratio;
    if (!sufficient_overlap(overlap, cfg.overlap)) {
      log.provenance = Provenance::kPriorLowOverlap;
    } else {
      try {
        const SampleSet gate_sample = sample(
            overlap.curr_subset_aligned, cfg.sampling, cfg.sampling.count);
        const StabilityReport stability =
            assess_stability(gate_sample, cfg.c_thres);
        log.stability_evaluated = true;
        log.eigenvalues = stability.eigenvalues;
        log.condition_number = stability.condition_number;
        log.stable = stability.stable;
        if (cfg.gate_enabled && !stability.stable) {
          log.provenance = Provenance::kPriorUnstable;
        } else {
          const SpatialIndex target_index(overlap.prev_subset);
          const RegistrationResult icp =
              icp_register(overlap.curr_subset_aligned, overlap.prev_subset,
                           target_index, cfg.sampling, cfg.icp);
          relative = compose(icp.transform, effective_prior);
          log.provenance = Provenance::kIcp;
          log.fitness = icp.fitness;
          log.iterations = icp.iterations;
        }
      } catch (const Error&) {
        relative = effective_prior;
        log.provenance = Provenance::kPriorIcpFailed;
      }
    }
  }

  log.relative = relative;
  state.pose_ = compose(state.pose_, relative);
  state.trajectory_.push_back({cloud.stamp, state.pose_});
  state.last_stamp_ = cloud.stamp;
  if (usable) {
    state.map_.add(apply(state.pose_, reg_cloud));
    state.last_cloud_ = std::move(reg_cloud);
    state.last_index_.emplace(state.last_cloud_);
    state.carry_ = RigidTransform();
    state.carry_is_identity_ = true;
  }

  finish(log);
  return log;
}

}  // namespace gsicp
