// gsicp: geometrically stable ICP with odometry priors
// SPDX-License-Identifier: MIT

#pragma once

#include "gsicp/config.hpp"
#include "gsicp/error.hpp"
#include "gsicp/evaluation.hpp"
#include "gsicp/geometry.hpp"
#include "gsicp/icp.hpp"
#include "gsicp/kdtree.hpp"
#include "gsicp/normal_estimation.hpp"
#include "gsicp/overlap.hpp"
#include "gsicp/pipeline.hpp"
#include "gsicp/ply_io.hpp"
#include "gsicp/point_cloud.hpp"
#include "gsicp/runner.hpp"
#include "gsicp/sampling.hpp"
#include "gsicp/scene.hpp"
#include "gsicp/simulator.hpp"
#include "gsicp/stability.hpp"
#include "gsicp/trajectory_io.hpp"
#include "gsicp/voxel_filter.hpp"
