// gsicp: geometrically stable ICP with odometry priors
// SPDX-License-Identifier: MIT
//
// Minimal binary little-endian PLY reader/writer for float32 xyz clouds with
// optional nx ny nz. Points with an all-zero normal are read back as having
// no usable normal (the flag itself is not stored in the file).

#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gsicp/error.hpp"
#include "gsicp/point_cloud.hpp"

namespace gsicp {

inline void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  const bool with_normals = cloud.has_normals();
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n";
  if (with_normals) {
    out << "property float nx\nproperty float ny\nproperty float nz\n";
  }
  out << "end_header\n";
  std::vector<float> row(with_normals ? 6 : 3);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    row[0] = static_cast<float>(cloud.points[i].x());
    row[1] = static_cast<float>(cloud.points[i].y());
    row[2] = static_cast<float>(cloud.points[i].z());
    if (with_normals) {
      const bool valid = cloud.normal_valid[i] != 0;
      row[3] = valid ? static_cast<float>(cloud.normals[i].x()) : 0.0f;
      row[4] = valid ? static_cast<float>(cloud.normals[i].y()) : 0.0f;
      row[5] = valid ? static_cast<float>(cloud.normals[i].z()) : 0.0f;
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw IoError("short write: " + path.string());
}

inline PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());

  std::string line;
  std::getline(in, line);
  if (line != "ply") throw IoError("not a PLY file: " + path.string());

  std::size_t vertex_count = 0;
  std::vector<std::string> props;
  bool binary_le = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      binary_le = fmt == "binary_little_endian";
    } else if (word == "element") {
      std::string name;
      ls >> name >> vertex_count;
      if (name != "vertex") {
        throw IoError("unsupported PLY element '" + name + "' in " + path.string());
      }
    } else if (word == "property") {
      std::string type, name;
      ls >> type >> name;
      if (type != "float") {
        throw IoError("unsupported PLY property type '" + type + "' in " +
                      path.string());
      }
      props.push_back(name);
    } else if (word == "end_header") {
      break;
    } else if (word == "comment") {
      continue;
    }
  }
  if (!binary_le) {
    throw IoError("expected binary_little_endian PLY: " + path.string());
  }
  const bool plain = props == std::vector<std::string>{"x", "y", "z"};
  const bool with_normals =
      props == std::vector<std::string>{"x", "y", "z", "nx", "ny", "nz"};
  if (!plain && !with_normals) {
    throw IoError("unsupported PLY property layout in " + path.string());
  }

  PointCloud cloud;
  cloud.points.resize(vertex_count);
  if (with_normals) {
    cloud.normals.resize(vertex_count);
    cloud.normal_valid.resize(vertex_count);
  }
  std::vector<float> row(with_normals ? 6 : 3);
  for (std::size_t i = 0; i < vertex_count; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) throw IoError("truncated PLY payload: " + path.string());
    cloud.points[i] = Eigen::Vector3d(row[0], row[1], row[2]);
    if (with_normals) {
      cloud.normals[i] = Eigen::Vector3d(row[3], row[4], row[5]);
      cloud.normal_valid[i] = cloud.normals[i].squaredNorm() > 0.25 ? 1 : 0;
    }
  }
  return cloud;
}

}  // namespace gsicp
