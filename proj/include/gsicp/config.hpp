// gsicp: geometrically stable ICP with odometry priors
// SPDX-License-Identifier: MIT
//
// JSON configuration for the pipeline and the simulator. Unknown keys are
// rejected so typos fail loudly instead of silently running defaults.

#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#include "gsicp/error.hpp"
#include "gsicp/pipeline.hpp"
#include "gsicp/simulator.hpp"

namespace gsicp {

namespace detail {

using Json = nlohmann::json;

inline void check_keys(const Json& obj, const char* where,
                       std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) {
      throw ConfigError(std::string("unknown key '") + key + "' in " + where);
    }
  }
}

inline Eigen::Vector3d vec3(const Json& j, const char* where) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(std::string(where) + " must be a 3-element array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline RigidTransform transform(const Json& j, const char* where) {
  check_keys(j, where, {"translation", "rotation_wxyz"});
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
  if (j.contains("translation")) t = vec3(j["translation"], "translation");
  if (j.contains("rotation_wxyz")) {
    const auto& r = j["rotation_wxyz"];
    if (!r.is_array() || r.size() != 4) {
      throw ConfigError("rotation_wxyz must be a 4-element array [w,x,y,z]");
    }
    q = Eigen::Quaterniond(r[0].get<double>(), r[1].get<double>(),
                           r[2].get<double>(), r[3].get<double>());
    if (q.norm() < 1e-9) throw ConfigError("rotation_wxyz must be nonzero");
  }
  return RigidTransform(q, t);
}

inline SamplingStrategy::Kind strategy_kind(const std::string& name) {
  if (name == "all") return SamplingStrategy::Kind::kAll;
  if (name == "uniform") return SamplingStrategy::Kind::kUniform;
  if (name == "random") return SamplingStrategy::Kind::kRandom;
  if (name == "normal-space") return SamplingStrategy::Kind::kNormalSpace;
  throw ConfigError("unknown sampling strategy '" + name +
                    "' (use all|uniform|random|normal-space)");
}

inline Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return j;
}

}  // namespace detail

inline PipelineConfig parse_pipeline_config(const detail::Json& j) {
  using detail::check_keys;
  check_keys(j, "config",
             {"extrinsics", "voxel_leaf", "overlap", "sampling", "c_thres",
              "icp", "merge_window", "gate_enabled", "normal_k"});
  PipelineConfig cfg;
  cfg.sampling = SamplingStrategy::normal_space(0, 500);
  if (j.contains("extrinsics")) {
    cfg.extrinsics = detail::transform(j["extrinsics"], "extrinsics");
  }
  if (j.contains("voxel_leaf")) cfg.voxel.leaf = j["voxel_leaf"].get<double>();
  if (j.contains("overlap")) {
    const auto& o = j["overlap"];
    check_keys(o, "overlap", {"radius", "min_ratio", "min_points"});
    if (o.contains("radius")) cfg.overlap.radius = o["radius"].get<double>();
    if (o.contains("min_ratio")) cfg.overlap.min_ratio = o["min_ratio"].get<double>();
    if (o.contains("min_points")) {
      cfg.overlap.min_points = o["min_points"].get<std::size_t>();
    }
  }
  if (j.contains("sampling")) {
    const auto& s = j["sampling"];
    check_keys(s, "sampling", {"strategy", "count", "seed", "buckets_per_axis"});
    if (s.contains("strategy")) {
      cfg.sampling.kind = detail::strategy_kind(s["strategy"].get<std::string>());
    }
    if (s.contains("count")) cfg.sampling.count = s["count"].get<std::size_t>();
    if (s.contains("seed")) cfg.sampling.seed = s["seed"].get<std::uint64_t>();
    if (s.contains("buckets_per_axis")) {
      cfg.sampling.buckets_per_axis = s["buckets_per_axis"].get<int>();
    }
  }
  if (j.contains("c_thres")) cfg.c_thres = j["c_thres"].get<double>();
  if (j.contains("icp")) {
    const auto& i = j["icp"];
    check_keys(i, "icp",
               {"d_corr_max", "t_ransac_reject", "e_transform",
                "max_iterations", "e_euclidean_fitness",
                "resample_each_iteration"});
    if (i.contains("d_corr_max")) cfg.icp.d_corr_max = i["d_corr_max"].get<double>();
    if (i.contains("t_ransac_reject")) {
      cfg.icp.t_ransac_reject = i["t_ransac_reject"].get<double>();
    }
    if (i.contains("e_transform")) cfg.icp.e_transform = i["e_transform"].get<double>();
    if (i.contains("max_iterations")) {
      cfg.icp.max_iterations = i["max_iterations"].get<int>();
    }
    if (i.contains("e_euclidean_fitness")) {
      cfg.icp.e_euclidean_fitness = i["e_euclidean_fitness"].get<double>();
    }
    if (i.contains("resample_each_iteration")) {
      cfg.icp.resample_each_iteration = i["resample_each_iteration"].get<bool>();
    }
  }
  if (j.contains("merge_window")) cfg.merge_window = j["merge_window"].get<int>();
  if (j.contains("gate_enabled")) cfg.gate_enabled = j["gate_enabled"].get<bool>();
  if (j.contains("normal_k")) cfg.normal_k = j["normal_k"].get<std::size_t>();
  try {
    cfg.validate();
  } catch (const BadParams& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  return parse_pipeline_config(detail::load_json(path));
}

/// Simulator session: scene fixture, trajectory, sensor and odometry noise.
struct SimConfig {
  std::string scene = "ROOM";
  TrajectoryKind kind = TrajectoryKind::kOrbit;
  TrajectoryParams trajectory;
  SensorModel sensor;
  NoiseModel noise;
  RigidTransform extrinsics;  // odometry is written in the VI frame

  SimConfig() {
    trajectory.center = {0.0, 0.0, 0.8};
    trajectory.pitch_deg = 8.0;
    sensor.range_sigma = 0.002;
  }
};

inline SimConfig parse_sim_config(const detail::Json& j) {
  using detail::check_keys;
  check_keys(j, "sim config",
             {"scene", "trajectory", "sensor", "noise", "extrinsics"});
  SimConfig cfg;
  if (j.contains("scene")) cfg.scene = j["scene"].get<std::string>();
  if (j.contains("trajectory")) {
    const auto& t = j["trajectory"];
    check_keys(t, "trajectory",
               {"kind", "frames", "rate_hz", "start_time", "center", "radius",
                "arc_deg", "pitch_deg", "start", "end", "view_dir", "lateral",
                "travel", "rows", "row_step"});
    if (t.contains("kind")) {
      const std::string kind = t["kind"].get<std::string>();
      if (kind == "ORBIT") cfg.kind = TrajectoryKind::kOrbit;
      else if (kind == "CORRIDOR_PASS") cfg.kind = TrajectoryKind::kCorridorPass;
      else if (kind == "WALL_FACING") cfg.kind = TrajectoryKind::kWallFacing;
      else if (kind == "LAWNMOWER") cfg.kind = TrajectoryKind::kLawnmower;
      else throw ConfigError("unknown trajectory kind '" + kind + "'");
    }
    auto& p = cfg.trajectory;
    if (t.contains("frames")) p.frames = t["frames"].get<int>();
    if (t.contains("rate_hz")) p.rate_hz = t["rate_hz"].get<double>();
    if (t.contains("start_time")) p.start_time = t["start_time"].get<double>();
    if (t.contains("center")) p.center = detail::vec3(t["center"], "center");
    if (t.contains("radius")) p.radius = t["radius"].get<double>();
    if (t.contains("arc_deg")) p.arc_deg = t["arc_deg"].get<double>();
    if (t.contains("pitch_deg")) p.pitch_deg = t["pitch_deg"].get<double>();
    if (t.contains("start")) p.start = detail::vec3(t["start"], "start");
    if (t.contains("end")) p.end = detail::vec3(t["end"], "end");
    if (t.contains("view_dir")) p.view_dir = detail::vec3(t["view_dir"], "view_dir");
    if (t.contains("lateral")) p.lateral = detail::vec3(t["lateral"], "lateral");
    if (t.contains("travel")) p.travel = t["travel"].get<double>();
    if (t.contains("rows")) p.rows = t["rows"].get<int>();
    if (t.contains("row_step")) p.row_step = t["row_step"].get<double>();
  }
  if (j.contains("sensor")) {
    const auto& s = j["sensor"];
    check_keys(s, "sensor",
               {"hfov_deg", "vfov_deg", "width", "height", "min_range",
                "max_range", "range_sigma", "seed"});
    if (s.contains("hfov_deg")) cfg.sensor.hfov_deg = s["hfov_deg"].get<double>();
    if (s.contains("vfov_deg")) cfg.sensor.vfov_deg = s["vfov_deg"].get<double>();
    if (s.contains("width")) cfg.sensor.width = s["width"].get<int>();
    if (s.contains("height")) cfg.sensor.height = s["height"].get<int>();
    if (s.contains("min_range")) cfg.sensor.min_range = s["min_range"].get<double>();
    if (s.contains("max_range")) cfg.sensor.max_range = s["max_range"].get<double>();
    if (s.contains("range_sigma")) {
      cfg.sensor.range_sigma = s["range_sigma"].get<double>();
    }
    if (s.contains("seed")) cfg.sensor.seed = s["seed"].get<std::uint64_t>();
  }
  if (j.contains("noise")) {
    const auto& n = j["noise"];
    check_keys(n, "noise", {"sigma_t", "sigma_r_deg", "bias_t", "bias_r_deg", "seed"});
    if (n.contains("sigma_t")) cfg.noise.sigma_t = n["sigma_t"].get<double>();
    if (n.contains("sigma_r_deg")) {
      cfg.noise.sigma_r = n["sigma_r_deg"].get<double>() * M_PI / 180.0;
    }
    if (n.contains("bias_t")) cfg.noise.bias_t = detail::vec3(n["bias_t"], "bias_t");
    if (n.contains("bias_r_deg")) {
      cfg.noise.bias_r = detail::vec3(n["bias_r_deg"], "bias_r_deg") * M_PI / 180.0;
    }
    if (n.contains("seed")) cfg.noise.seed = n["seed"].get<std::uint64_t>();
  }
  if (j.contains("extrinsics")) {
    cfg.extrinsics = detail::transform(j["extrinsics"], "extrinsics");
  }
  return cfg;
}

inline SimConfig load_sim_config(const std::filesystem::path& path) {
  return parse_sim_config(detail::load_json(path));
}

}  // namespace gsicp
