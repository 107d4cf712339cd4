#pragma once

#include <Eigen/Dense>

namespace hsdm {

/// Row-major dense matrix; one row per node, edge or sample.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace hsdm
