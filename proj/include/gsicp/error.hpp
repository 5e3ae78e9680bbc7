// gsicp: geometrically stable ICP with odometry priors
// SPDX-License-Identifier: MIT

#pragma once

#include <stdexcept>
#include <string>

namespace gsicp {

/// Base class for all errors thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SmallAngleViolation : Error {
  using Error::Error;
};
struct EmptyCloud : Error {
  using Error::Error;
};
struct EmptyInput : Error {
  using Error::Error;
};
struct TooFewPoints : Error {
  using Error::Error;
};
struct MissingNormals : Error {
  using Error::Error;
};
struct EmptySample : Error {
  using Error::Error;
};
struct UnsupportedStrategy : Error {
  using Error::Error;
};
struct TooFewSamples : Error {
  using Error::Error;
};
struct NotSymmetric : Error {
  using Error::Error;
};
struct NoCorrespondences : Error {
  using Error::Error;
};
struct RankDeficient : Error {
  using Error::Error;
};
struct NonMonotonicTimestamp : Error {
  using Error::Error;
};
struct BadParams : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace gsicp
