#pragma once

#include <Eigen/Dense>

namespace ace {

/// Dense batch-major matrix: one sample per row.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace ace
