#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace depnet {

using Index = std::int32_t;
using Scalar = double;

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Row-major for per-node row access in the estimation loops.
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

/// Bad or inconsistent input data (CSV contents, dimension mismatches).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid configuration (flags, parameter ranges, missing files).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed (non-concave subproblem, degenerate fit).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace depnet
