#pragma once

#include "ace/numcore/types.hpp"

// Primitive numeric kernels shared by the taped and the plain evaluators.
// Both paths must call these so that their results agree bit for bit.
namespace ace::num::kernels {

/// y = x * W^T + b, with x batch-major (rows are samples), W out-by-in and b
/// an out-by-1 column.
Matrix affine(const Matrix& x, const Matrix& weight, const Matrix& bias);

/// Elementwise hyperbolic tangent, in place.
void tanh_inplace(Matrix& m);

/// Scalar tanh used by tanh_inplace. Accurate to a few ulp.
double tanh(double x);

/// Columns [left | right].
Matrix concat(const Matrix& left, const Matrix& right);

}  // namespace ace::num::kernels
