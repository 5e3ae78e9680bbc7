// gsicp: geometrically stable ICP with odometry priors
// SPDX-License-Identifier: MIT
//
// Batch drivers: dataset layout on disk, the full pipeline run producing a
// report directory, and simulated dataset generation.
//
// Dataset layout:
//   <dir>/clouds/<stamp>.ply   binary little-endian float32 clouds
//   <dir>/odometry.txt         absolute odometry poses (VI frame)
//   <dir>/ground_truth.txt     optional depth-sensor truth poses

#pragma once

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "gsicp/config.hpp"
#include "gsicp/error.hpp"
#include "gsicp/evaluation.hpp"
#include "gsicp/pipeline.hpp"
#include "gsicp/ply_io.hpp"
#include "gsicp/simulator.hpp"
#include "gsicp/trajectory_io.hpp"

namespace gsicp {

inline const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kInit: return "INIT";
    case Provenance::kIcp: return "ICP";
    case Provenance::kPrior: return "PRIOR";
    case Provenance::kPriorLowOverlap: return "PRIOR_LOW_OVERLAP";
    case Provenance::kPriorUnstable: return "PRIOR_UNSTABLE";
    case Provenance::kPriorIcpFailed: return "PRIOR_ICP_FAILED";
  }
  return "UNKNOWN";
}

/// One frames.jsonl record. Unavailable stages serialize as null; an
/// infinite condition number serializes as the string "inf".
inline nlohmann::json frame_log_json(const FrameLog& log) {
  nlohmann::json j;
  j["stamp"] = log.stamp;
  j["provenance"] = provenance_name(log.provenance);
  j["overlap_ratio"] =
      log.overlap_ratio < 0.0 ? nlohmann::json() : nlohmann::json(log.overlap_ratio);
  if (log.stability_evaluated) {
    j["eigenvalues"] = {log.eigenvalues[0], log.eigenvalues[1],
                        log.eigenvalues[2], log.eigenvalues[3],
                        log.eigenvalues[4], log.eigenvalues[5]};
    j["condition_number"] = std::isfinite(log.condition_number)
                                ? nlohmann::json(log.condition_number)
                                : nlohmann::json("inf");
    j["stable"] = log.stable;
  } else {
    j["eigenvalues"] = nullptr;
    j["condition_number"] = nullptr;
    j["stable"] = nullptr;
  }
  j["fitness"] =
      std::isnan(log.fitness) ? nlohmann::json() : nlohmann::json(log.fitness);
  j["iterations"] = log.iterations;
  j["elapsed"] = log.elapsed;
  return j;
}

struct Dataset {
  std::vector<double> stamps;                     // cloud stamps, sorted
  std::vector<std::filesystem::path> cloud_paths; // parallel to stamps
  std::vector<Pose> odometry;                     // absolute VI poses
  std::vector<std::size_t> odometry_index;        // stamp-matched, per cloud
  std::optional<std::vector<Pose>> ground_truth;  // depth-sensor truth
};

/// Validates the on-disk layout and associates cloud stamps with odometry
/// stamps (each must match within 0.05 s).
inline Dataset load_dataset(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw IoError("dataset directory not found: " + dir.string());
  }
  const fs::path clouds_dir = dir / "clouds";
  if (!fs::is_directory(clouds_dir)) {
    throw IoError("missing clouds/ directory in " + dir.string());
  }
  const fs::path odom_path = dir / "odometry.txt";
  if (!fs::exists(odom_path)) {
    throw IoError("missing odometry file: " + odom_path.string());
  }

  Dataset ds;
  std::vector<std::pair<double, fs::path>> entries;
  for (const auto& entry : fs::directory_iterator(clouds_dir)) {
    if (entry.path().extension() != ".ply") continue;
    try {
      entries.emplace_back(std::stod(entry.path().stem().string()), entry.path());
    } catch (const std::exception&) {
      throw IoError("cloud filename is not a decimal stamp: " +
                    entry.path().string());
    }
  }
  if (entries.empty()) {
    throw IoError("no .ply clouds found in " + clouds_dir.string());
  }
  std::sort(entries.begin(), entries.end());
  for (auto& [stamp, path] : entries) {
    ds.stamps.push_back(stamp);
    ds.cloud_paths.push_back(std::move(path));
  }

  ds.odometry = read_trajectory(odom_path);
  for (double stamp : ds.stamps) {
    std::size_t best = 0;
    double best_dt = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ds.odometry.size(); ++i) {
      const double dt = std::abs(ds.odometry[i].stamp - stamp);
      if (dt < best_dt) {
        best_dt = dt;
        best = i;
      }
    }
    if (best_dt > 0.05) {
      throw IoError("cloud stamp " + std::to_string(stamp) +
                    " has no odometry pose within 0.05 s");
    }
    ds.odometry_index.push_back(best);
  }

  const fs::path gt_path = dir / "ground_truth.txt";
  if (fs::exists(gt_path)) ds.ground_truth = read_trajectory(gt_path);
  return ds;
}

struct RunReport {
  std::vector<Pose> trajectory;
  std::vector<FrameLog> logs;
  nlohmann::json summary;
};

/// Runs the pipeline over a dataset in stamp order and writes
/// trajectory.txt, map.ply, frames.jsonl and summary.json into out_dir.
/// Partial outputs are removed if the run fails.
inline RunReport run_dataset(const std::filesystem::path& dataset_dir,
                             const PipelineConfig& cfg,
                             const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  const Dataset ds = load_dataset(dataset_dir);
  fs::create_directories(out_dir);
  const fs::path traj_path = out_dir / "trajectory.txt";
  const fs::path map_path = out_dir / "map.ply";
  const fs::path frames_path = out_dir / "frames.jsonl";
  const fs::path summary_path = out_dir / "summary.json";

  try {
    RunReport report;
    PipelineState state(cfg);
    std::ofstream frames_out(frames_path);
    if (!frames_out) throw IoError("cannot write " + frames_path.string());

    for (std::size_t k = 0; k < ds.stamps.size(); ++k) {
      PointCloud cloud = read_ply(ds.cloud_paths[k]);
      cloud.stamp = ds.stamps[k];
      cloud.frame = "sensor";
      RigidTransform vi_rel;  // identity for the first frame
      if (k > 0) {
        vi_rel = compose(
            invert(ds.odometry[ds.odometry_index[k - 1]].transform),
            ds.odometry[ds.odometry_index[k]].transform);
      }
      const FrameLog log = process_frame(state, cloud, vi_rel, cfg);
      frames_out << frame_log_json(log).dump() << "\n";
      report.logs.push_back(log);
    }
    frames_out.close();
    if (!frames_out) throw IoError("short write: " + frames_path.string());

    report.trajectory = state.trajectory();
    write_trajectory(traj_path, report.trajectory);
    write_ply(map_path, state.map());

    // Summary: provenance counts, timing percentiles, optional ATE.
    nlohmann::json counts;
    for (const char* name : {"INIT", "ICP", "PRIOR", "PRIOR_LOW_OVERLAP",
                             "PRIOR_UNSTABLE", "PRIOR_ICP_FAILED"}) {
      counts[name] = 0;
    }
    std::vector<double> elapsed;
    for (const auto& log : report.logs) {
      counts[provenance_name(log.provenance)] =
          counts[provenance_name(log.provenance)].get<int>() + 1;
      elapsed.push_back(log.elapsed);
    }
    std::sort(elapsed.begin(), elapsed.end());
    const auto pct = [&](double p) {
      const std::size_t i = static_cast<std::size_t>(
          std::min(p * (elapsed.size() - 1) + 0.5,
                   static_cast<double>(elapsed.size() - 1)));
      return elapsed[i];
    };
    nlohmann::json summary;
    summary["frames"] = report.logs.size();
    summary["provenance_counts"] = counts;
    summary["timing"] = {{"p50", pct(0.50)},
                         {"p95", pct(0.95)},
                         {"max", elapsed.back()}};
    if (ds.ground_truth && report.trajectory.size() >= 2 &&
        ds.ground_truth->size() >= 2) {
      const EvaluationReport eval =
          evaluate_trajectory(report.trajectory, *ds.ground_truth);
      summary["ate"] = {{"rmse", eval.ate_rmse},
                        {"matched", eval.matched},
                        {"rpe_trans_rmse", eval.rpe_trans_rmse},
                        {"rpe_rot_rmse", eval.rpe_rot_rmse}};
    }
    report.summary = summary;
    std::ofstream summary_out(summary_path);
    summary_out << summary.dump(2) << "\n";
    if (!summary_out) throw IoError("short write: " + summary_path.string());
    return report;
  } catch (...) {
    for (const auto& p : {traj_path, map_path, frames_path, summary_path}) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    throw;
  }
}

/// Renders a simulated dataset: clouds, noisy odometry (VI frame) and
/// ground_truth.txt (depth-sensor frame). Deterministic per config seeds.
inline void simulate_dataset(const SimConfig& cfg,
                             const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  const Scene scene = make_scene(cfg.scene);
  std::vector<Pose> truth;
  if (cfg.trajectory.frames == 1) {
    // Single-frame dataset: take the first pose of the 2-frame trajectory.
    TrajectoryParams two = cfg.trajectory;
    two.frames = 2;
    truth = {make_trajectory(cfg.kind, two).front()};
  } else {
    truth = make_trajectory(cfg.kind, cfg.trajectory);
  }

  fs::create_directories(out_dir / "clouds");
  char name[64];
  for (std::size_t k = 0; k < truth.size(); ++k) {
    SensorModel sensor = cfg.sensor;
    sensor.seed = cfg.sensor.seed + 1000 * k;
    const PointCloud cloud = render_depth(scene, truth[k].transform, sensor);
    std::snprintf(name, sizeof(name), "%.6f.ply", truth[k].stamp);
    write_ply(out_dir / "clouds" / name, cloud);
  }

  // Depth truth -> VI poses via the extrinsics, then per-step noise.
  std::vector<Pose> vi_truth;
  vi_truth.reserve(truth.size());
  for (const auto& pose : truth) {
    vi_truth.push_back({pose.stamp, compose(pose.transform, cfg.extrinsics)});
  }
  std::vector<Pose> vi_noisy;
  if (truth.size() > 1) {
    const std::vector<RigidTransform> rels = perturb_odometry(vi_truth, cfg.noise);
    std::vector<double> stamps;
    for (const auto& pose : truth) stamps.push_back(pose.stamp);
    vi_noisy = integrate_relative(vi_truth.front(), rels, stamps);
  } else {
    vi_noisy = vi_truth;
  }
  write_trajectory(out_dir / "odometry.txt", vi_noisy);
  write_trajectory(out_dir / "ground_truth.txt", truth);
}

}  // namespace gsicp
