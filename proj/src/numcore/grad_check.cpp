#include "ace/numcore/grad_check.hpp"

#include <cmath>

#include "ace/errors.hpp"

namespace ace::num {

namespace {
double evaluate(const TapedScalar& f) {
  Tape tape;
  const double v = tape.value(f(tape))(0, 0);
  if (!std::isfinite(v)) throw NumericError("grad_check: non-finite objective");
  return v;
}
}  // namespace

GradCheckResult grad_check(const TapedScalar& f, ParamStore& store, double h,
                           const std::vector<int>& blocks) {
  if (!(h > 0.0)) throw ContractError("grad_check: step must be positive");
  std::vector<int> ids = blocks;
  if (ids.empty()) {
    for (int i = 0; i < store.size(); ++i) ids.push_back(i);
  }

  store.zero_grad();
  {
    Tape tape;
    NodeId out = f(tape);
    if (!std::isfinite(tape.value(out)(0, 0))) {
      throw NumericError("grad_check: non-finite objective");
    }
    tape.backward(out);
  }

  GradCheckResult result;
  for (int b : ids) {
    Matrix analytic = store.block(b).grad;
    Matrix& value = store.block(b).value;
    for (Eigen::Index k = 0; k < value.size(); ++k) {
      const double saved = value.data()[k];
      value.data()[k] = saved + h;
      const double up = evaluate(f);
      value.data()[k] = saved - h;
      const double down = evaluate(f);
      value.data()[k] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double err =
          std::fabs(analytic.data()[k] - numeric) / std::max(1.0, std::fabs(numeric));
      ++result.entries_checked;
      if (err > result.max_relative_error || result.worst_block < 0) {
        result.max_relative_error = std::max(result.max_relative_error, err);
        result.worst_block = b;
        result.worst_entry = k;
      }
    }
  }
  store.zero_grad();
  return result;
}

}  // namespace ace::num
