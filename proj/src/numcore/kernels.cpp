#include "ace/numcore/kernels.hpp"

#include <cmath>

#include "ace/errors.hpp"

namespace ace::num::kernels {

Matrix affine(const Matrix& x, const Matrix& weight, const Matrix& bias) {
  if (x.cols() != weight.cols() || bias.rows() != weight.rows() || bias.cols() != 1) {
    throw DimensionError("affine: input width " + std::to_string(x.cols()) + " vs weight " +
                         std::to_string(weight.rows()) + "x" + std::to_string(weight.cols()));
  }
  Matrix y(x.rows(), weight.rows());
  y.noalias() = x * weight.transpose();
  y.rowwise() += bias.col(0).transpose();
  return y;
}

double tanh(double x) {
  // expm1 near zero keeps full relative precision; exp elsewhere is cheaper.
  const double ax = std::fabs(x);
  double t;
  if (ax > 0.55) {
    t = 1.0 - 2.0 / (std::exp(2.0 * ax) + 1.0);
  } else {
    const double e = std::expm1(2.0 * ax);
    t = e / (e + 2.0);
  }
  return std::copysign(t, x);
}

void tanh_inplace(Matrix& m) {
  double* p = m.data();
  const Eigen::Index n = m.size();
  for (Eigen::Index i = 0; i < n; ++i) p[i] = tanh(p[i]);
}

Matrix concat(const Matrix& left, const Matrix& right) {
  if (left.rows() != right.rows()) {
    throw DimensionError("concat: row counts differ");
  }
  Matrix out(left.rows(), left.cols() + right.cols());
  out.leftCols(left.cols()) = left;
  out.rightCols(right.cols()) = right;
  return out;
}

}  // namespace ace::num::kernels
