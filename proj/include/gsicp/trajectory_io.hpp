// gsicp: geometrically stable ICP with odometry priors
// SPDX-License-Identifier: MIT
//
// Timestamped pose files: one `stamp tx ty tz qx qy qz qw` line per pose,
// the common trajectory interchange format, so third-party evaluation tools
// work on the outputs unmodified.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gsicp/error.hpp"
#include "gsicp/geometry.hpp"

namespace gsicp {

inline void write_trajectory(const std::filesystem::path& path,
                             const std::vector<Pose>& poses) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  char line[256];
  for (const auto& pose : poses) {
    const auto& q = pose.transform.rotation;
    const auto& t = pose.transform.translation;
    std::snprintf(line, sizeof(line),
                  "%.9f %.9f %.9f %.9f %.9f %.9f %.9f %.9f\n", pose.stamp,
                  t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w());
    out << line;
  }
  if (!out) throw IoError("short write: " + path.string());
}

inline std::vector<Pose> read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::vector<Pose> poses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double stamp, tx, ty, tz, qx, qy, qz, qw;
    if (!(ls >> stamp >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
      throw IoError(path.string() + ":" + std::to_string(line_no) +
                    ": expected 'stamp tx ty tz qx qy qz qw'");
    }
    if (!poses.empty() && !(stamp > poses.back().stamp)) {
      throw IoError(path.string() + ":" + std::to_string(line_no) +
                    ": stamps must be strictly increasing");
    }
    poses.push_back({stamp, RigidTransform(Eigen::Quaterniond(qw, qx, qy, qz),
                                           Eigen::Vector3d(tx, ty, tz))});
  }
  return poses;
}

}  // namespace gsicp
